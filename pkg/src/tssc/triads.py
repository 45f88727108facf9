"""Triadic motifs: polar coordinates, ordinal patterns and permutation entropy."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DomainError, NumericError

# Ordinal codes in a fixed order; index into this tuple is the pattern id.
PATTERNS: tuple[int, ...] = (123, 132, 213, 231, 312, 321)
_CODE_INDEX = {code: i for i, code in enumerate(PATTERNS)}


class TriadPoint(NamedTuple):
    t: int
    dx: float
    dy: float
    R: float
    theta: float
    pattern: int


@dataclass(frozen=True)
class TriadSequence:
    """The N-2 triads of a series, stored column-wise."""

    t: np.ndarray
    dx: np.ndarray
    dy: np.ndarray
    R: np.ndarray
    theta: np.ndarray
    pattern: np.ndarray  # ordinal codes, e.g. 231

    def __len__(self):
        return len(self.t)

    def __getitem__(self, i) -> TriadPoint:
        return TriadPoint(int(self.t[i]), float(self.dx[i]), float(self.dy[i]),
                          float(self.R[i]), float(self.theta[i]), int(self.pattern[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def cartesian(self) -> tuple[np.ndarray, np.ndarray]:
        """Positions ``(R cos theta, R sin theta)`` in the triad plane."""
        return self.R * np.cos(self.theta), self.R * np.sin(self.theta)


def _values(ts) -> np.ndarray:
    values = getattr(ts, "values", ts)
    return np.asarray(values, dtype=float)


def polar(dx, dy):
    """Radius and angle in ``[-pi, pi)`` of the difference vector ``(dx, dy)``."""
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    R = np.hypot(dx, dy)
    theta = np.arctan2(dy, dx)
    theta = np.where(theta >= math.pi, -math.pi, theta)
    theta = np.where(R == 0, 0.0, theta)
    return R, theta


def _codes(windows: np.ndarray) -> np.ndarray:
    order = np.argsort(windows, axis=-1, kind="stable") + 1
    return order[..., 0] * 100 + order[..., 1] * 10 + order[..., 2]


def ordinal_pattern(triad):
    """Indices 1..3 of ``triad`` listed by ascending value; ties keep index order.

    An ``(n, 3)`` array gives an array of ``n`` codes.

    >>> ordinal_pattern((8, 2, 5))
    231
    """
    w = np.asarray(triad, dtype=float)
    if w.shape[-1:] != (3,) or w.ndim > 2:
        raise DomainError(f"a triad has three values, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise NumericError("non-finite value in triad")
    codes = _codes(w)
    return int(codes) if w.ndim == 1 else codes


def ordinal_patterns(values) -> np.ndarray:
    """Ordinal code of every consecutive triad of ``values``."""
    x = _values(values)
    if len(x) < 3:
        raise DomainError(f"need at least 3 values, got {len(x)}")
    if not np.all(np.isfinite(x)):
        raise NumericError("series contains non-finite values")
    return _codes(np.lib.stride_tricks.sliding_window_view(x, 3))


def triad_sequence(ts) -> TriadSequence:
    x = _values(ts)
    if x.ndim != 1 or len(x) < 3:
        raise DomainError(f"need a 1-D series of at least 3 values, got shape {x.shape}")
    d = np.diff(x) + 0.0  # folds -0.0 into 0.0
    dx, dy = d[:-1], d[1:]
    R, theta = polar(dx, dy)
    return TriadSequence(np.arange(len(dx)), dx, dy, R, theta, ordinal_patterns(x))


@dataclass(frozen=True)
class BandtPompeDistribution:
    probs: np.ndarray  # indexed like PATTERNS
    count: int

    def __getitem__(self, code: int) -> float:
        return float(self.probs[_CODE_INDEX[code]])

    def as_dict(self) -> dict[int, float]:
        return {code: float(p) for code, p in zip(PATTERNS, self.probs)}


def bandt_pompe(ts) -> BandtPompeDistribution:
    codes = ordinal_patterns(ts)
    counts = np.array([np.count_nonzero(codes == c) for c in PATTERNS])
    return BandtPompeDistribution(counts / len(codes), len(codes))


def permutation_entropy(dist, normalized: bool = False) -> float:
    """Shannon entropy (natural log) of an ordinal distribution."""
    p = np.asarray(getattr(dist, "probs", dist), dtype=float)
    p = p[p > 0]
    h = float(-np.sum(p * np.log(p))) if len(p) else 0.0
    h = h if h > 0 else 0.0
    if normalized:
        h /= math.log(len(PATTERNS))
    return h


def forbidden_band_fraction(points: TriadSequence, half_width: float) -> float:
    """Share of triads whose angle lies within ``half_width`` of +-pi/2."""
    theta = np.asarray(getattr(points, "theta", points), dtype=float)
    if theta.size == 0:
        raise DomainError("empty triad sequence")
    if not 0 < half_width < math.pi / 4:
        raise DomainError(f"half_width must lie in (0, pi/4), got {half_width}")
    near = (np.abs(theta - math.pi / 2) < half_width) | (np.abs(theta + math.pi / 2) < half_width)
    return float(np.count_nonzero(near)) / theta.size
