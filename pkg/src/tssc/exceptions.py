"""Exception types raised across the package."""


class TSSCError(Exception):
    """Base class for all package errors."""


class DomainError(TSSCError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class NumericError(TSSCError, ArithmeticError):
    """A computation produced a non-finite value."""


class ConfigError(TSSCError, ValueError):
    pass


class ShapeError(TSSCError, ValueError):
    pass


class FormatError(TSSCError, ValueError):
    """A binary file has the wrong magic or an unsupported version."""


class CorruptionError(TSSCError, ValueError):
    """A binary file ends early or contains inconsistent records."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class TrainingError(TSSCError, RuntimeError):
    pass
