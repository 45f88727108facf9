"""Coarse-grained heat-maps of triad clouds (TSSC) and delay pairs (DCR)."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from os import PathLike

import numpy as np

from .exceptions import DomainError
from .triads import TriadSequence, triad_sequence

TSSC_BOUNDS = (-2.0, 2.0)
DCR_BOUNDS = (-1.0, 1.0)


class Encoder(str, enum.Enum):
    TSSC = "tssc"
    DCR = "dcr"


@dataclass
class HeatMap:
    """Normalised G x G occupancy grid.

    ``cells[j, i]`` counts points whose vertical coordinate falls in bin ``j``
    (ascending from ``bounds[0]``) and horizontal coordinate in bin ``i``.
    """

    cells: np.ndarray
    raw_counts: np.ndarray
    bounds: tuple[float, float]
    encoder: Encoder

    @property
    def grid_size(self) -> int:
        return self.cells.shape[0]


def bin_index(v, grid_size: int, bounds) -> np.ndarray:
    """Lower-edge-inclusive bin of each value; values on or past a bound are clamped."""
    lo, hi = bounds
    idx = np.floor(grid_size * (np.asarray(v, dtype=float) - lo) / (hi - lo))
    return np.clip(idx, 0, grid_size - 1).astype(np.intp)


def count_grid(x, y, grid_size: int, bounds) -> np.ndarray:
    ix = bin_index(x, grid_size, bounds)
    iy = bin_index(y, grid_size, bounds)
    counts = np.zeros(grid_size * grid_size, dtype=np.int64)
    np.add.at(counts, iy * grid_size + ix, 1)
    return counts.reshape(grid_size, grid_size)


def normalize_counts(counts: np.ndarray, norm: str = "max") -> np.ndarray:
    counts = np.asarray(counts)
    if norm == "max":
        denom = counts.max()
    elif norm == "sum":
        denom = counts.sum()
    else:
        raise DomainError(f"unknown normalisation {norm!r}")
    if denom == 0:
        return np.zeros(counts.shape)
    return counts / float(denom)


def _check_grid(grid_size):
    if int(grid_size) != grid_size or grid_size < 2:
        raise DomainError(f"grid size must be an integer >= 2, got {grid_size}")


def tssc_heatmap(points, grid_size: int = 64, norm: str = "max",
                 bounds=TSSC_BOUNDS) -> HeatMap:
    """Bin triads at ``(R cos theta, R sin theta)`` over ``bounds`` squared.

    ``points`` may be a :class:`TriadSequence` or a raw series, in which case
    its triads are computed first.
    """
    _check_grid(grid_size)
    if not isinstance(points, TriadSequence):
        points = triad_sequence(points)
    if len(points) == 0:
        raise DomainError("no triads to bin")
    x, y = points.cartesian()
    counts = count_grid(x, y, grid_size, bounds)
    return HeatMap(normalize_counts(counts, norm), counts, tuple(bounds), Encoder.TSSC)


def dcr_heatmap(ts, grid_size: int = 64, norm: str = "max", bounds=DCR_BOUNDS) -> HeatMap:
    """Bin the delay-1 pairs ``(x_t, x_{t+1})``."""
    _check_grid(grid_size)
    x = np.asarray(getattr(ts, "values", ts), dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise DomainError(f"need a 1-D series of at least 2 values, got shape {x.shape}")
    counts = count_grid(x[:-1], x[1:], grid_size, bounds)
    return HeatMap(normalize_counts(counts, norm), counts, tuple(bounds), Encoder.DCR)


def to_pixels(hm: HeatMap) -> np.ndarray:
    """8-bit image, top row holding the largest vertical coordinate."""
    return np.round(255.0 * np.flipud(hm.cells)).astype(np.uint8)


def export_pgm(hm: HeatMap, path: str | PathLike) -> None:
    g = hm.grid_size
    header = f"P5\n{g} {g}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(to_pixels(hm).tobytes())
    except OSError as exc:
        raise OSError(f"cannot write PGM to {path}: {exc}") from exc


def read_pgm(path) -> np.ndarray:
    """Read back a P5 image written by :func:`export_pgm`."""
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise DomainError(f"{path}: not a binary PGM")
    w, h = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def export_csv(hm: HeatMap, path) -> None:
    """Cell values row-major (same orientation as ``cells``), 6 significant digits."""
    np.savetxt(path, hm.cells, fmt="%.6g", delimiter=",")
