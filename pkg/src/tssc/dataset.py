"""Benchmark datasets D0..D5 split into BASE / DP / NS-SP / NS-DP quadrants.

Binary layout of a ``.tssd`` file (little-endian)::

    header  "TSSD" u16 version, u16 map count, u32 params per map, u32 slices,
            u32 series length, u64 seed, f64 IC width
    record  u8 label, u8 quadrant, u16 slice, u16 param index,
            f64 x dim(label) initial condition, f64 x (series length / 2) values

Records run to end of file. The IC dimension is implied by the map label.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .exceptions import ConfigError, CorruptionError, FormatError, NumericError
from .maps import MAP_SPECS, MapSpec, Segment, TimeSeries, iterate_batch, normalize, perturb_ic

QUADRANTS = ("base", "dp", "ns_sp", "ns_dp")
MAGIC = b"TSSD"
VERSION = 1
_HEADER = struct.Struct("<4sHHIIIQd")
_RECORD = struct.Struct("<BBHH")


@dataclass(frozen=True)
class DatasetConfig:
    params_per_map: int = 1024
    slices: int = 1
    series_len: int = 2000
    ic_width: float = 0.0
    master_seed: int = 0
    sampling: str = "grid"
    normalize_segments: bool = True

    def __post_init__(self):
        if self.params_per_map < 2 or self.params_per_map % 2:
            raise ConfigError(f"params_per_map must be even and >= 2, got {self.params_per_map}")
        if self.series_len < 6 or self.series_len % 2:
            raise ConfigError(f"series_len must be even and >= 6, got {self.series_len}")
        if self.slices < 1:
            raise ConfigError("need at least one slice")
        if self.ic_width < 0:
            raise ConfigError("IC width must be >= 0")
        if self.sampling not in ("grid", "random"):
            raise ConfigError(f"unknown sampling {self.sampling!r}")

    @classmethod
    def for_index(cls, i: int, params_per_map=1024, slices=32, series_len=2000,
                  master_seed=0, **kw) -> "DatasetConfig":
        """Config of dataset D_i: one unperturbed slice for i=0, else IC width 0.1*i."""
        if not 0 <= i <= 5:
            raise ConfigError(f"dataset index must be 0..5, got {i}")
        return cls(params_per_map, 1 if i == 0 else slices, series_len,
                   round(0.1 * i, 10), master_seed, **kw)


def sample_control_params(spec: MapSpec, m: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """``m`` parameter vectors for ``spec``, shape ``(m, len(spec.param_ranges))``.

    Without ``rng`` the values form an evenly spaced half-open grid, a
    ``sqrt(m) x sqrt(m)`` lattice (first parameter outer) for two-parameter
    maps. With ``rng`` they are drawn uniformly instead.
    """
    if m < 2:
        raise ConfigError(f"need at least 2 parameter samples, got {m}")
    free = spec.free_params
    names = [r.name for r in spec.param_ranges]
    rows = []
    if len(free) == 1:
        r = free[0]
        u = rng.random(m) if rng is not None else np.arange(m) / m
        rows = [{r.name: r.lower + uj * (r.upper - r.lower)} for uj in u]
    elif len(free) == 2:
        a, b = free
        if rng is not None:
            for ua, ub in rng.random((m, 2)):
                va = a.lower + ua * (a.upper - a.lower)
                hi = spec.effective_upper({a.name: va})[b.name]
                rows.append({a.name: va, b.name: b.lower + ub * (hi - b.lower)})
        else:
            side = math.isqrt(m)
            if side * side != m:
                raise ConfigError(f"{spec.name} has two parameters; m={m} is not a perfect square")
            for j in range(side):
                va = a.lower + j * (a.upper - a.lower) / side
                hi = spec.effective_upper({a.name: va})[b.name]
                for k in range(side):
                    rows.append({a.name: va, b.name: b.lower + k * (hi - b.lower) / side})
    else:
        raise ConfigError(f"{spec.name}: unsupported number of free parameters")
    fixed = {r.name: r.lower for r in spec.param_ranges if r.fixed}
    return np.array([[{**fixed, **row}[n] for n in names] for row in rows], dtype=float)


@dataclass
class Quadrant:
    """Segments of one quadrant in one slice, ordered by (label, param index)."""

    values: np.ndarray
    labels: np.ndarray
    param_index: np.ndarray
    ics: list[tuple[float, ...]]
    slice: int = 0
    segment: Segment = Segment.FIRST_HALF

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, Quadrant):
            return NotImplemented
        return (self.slice == other.slice
                and self.values.shape == other.values.shape
                and self.values.tobytes() == other.values.tobytes()
                and np.array_equal(self.labels, other.labels)
                and np.array_equal(self.param_index, other.param_index)
                and [np.array(c).tobytes() for c in self.ics]
                == [np.array(c).tobytes() for c in other.ics])

    def series(self, params: np.ndarray | None = None) -> Iterator[tuple[TimeSeries, int]]:
        for k in range(len(self)):
            label = int(self.labels[k])
            p = () if params is None else tuple(params[label][self.param_index[k]])
            yield TimeSeries(self.values[k], MAP_SPECS[label].map_id, p, self.ics[k],
                             self.segment), label


@dataclass
class QuadrantSet:
    base: Quadrant
    dp: Quadrant
    ns_sp: Quadrant
    ns_dp: Quadrant

    def __getitem__(self, name) -> Quadrant:
        if name not in QUADRANTS:
            raise KeyError(name)
        return getattr(self, name)


@dataclass
class Dataset:
    config: DatasetConfig
    slices: list[QuadrantSet] = field(default_factory=list)
    specs: Sequence[MapSpec] = MAP_SPECS

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return _header_key(self.config) == _header_key(other.config) and self.slices == other.slices

    def pooled(self, quadrant: str) -> tuple[np.ndarray, np.ndarray]:
        """All slices of one quadrant stacked into ``(X, y)``."""
        parts = [s[quadrant] for s in self.slices]
        if not parts:
            return np.empty((0, self.config.series_len // 2)), np.empty(0, dtype=np.int64)
        X = np.concatenate([q.values for q in parts])
        y = np.concatenate([q.labels for q in parts]).astype(np.int64)
        return X, y

    def control_params(self) -> list[np.ndarray]:
        return [_params_for(spec, self.config, j) for j, spec in enumerate(self.specs)]


def _header_key(cfg: DatasetConfig) -> tuple:
    # the fields a .tssd header records
    return (cfg.params_per_map, cfg.slices, cfg.series_len, cfg.master_seed, cfg.ic_width)


def _params_for(spec, cfg: DatasetConfig, map_index: int) -> np.ndarray:
    rng = None
    if cfg.sampling == "random":
        rng = np.random.default_rng([cfg.master_seed, 1_000_003, map_index])
    return sample_control_params(spec, cfg.params_per_map, rng)


def ic_rng(master_seed: int, slice_index: int, map_index: int) -> np.random.Generator:
    """Independent stream for one (slice, map) pair."""
    return np.random.default_rng([master_seed, slice_index, map_index])


def _build_slice(cfg: DatasetConfig, specs, slice_index: int, params) -> QuadrantSet:
    half = cfg.series_len // 2
    parts = {q: ([], [], [], []) for q in QUADRANTS}
    for j, spec in enumerate(specs):
        ic = perturb_ic(spec, cfg.ic_width, ic_rng(cfg.master_seed, slice_index, j))
        try:
            full = iterate_batch(spec, params[j], ic, cfg.series_len)
        except NumericError as exc:
            raise NumericError(f"map {spec.name}, slice {slice_index}, "
                               f"param index {getattr(exc, 'row', '?')}: {exc}") from exc
        first, second = full[:, :half], full[:, half:]
        if cfg.normalize_segments:
            first, second = normalize(first), normalize(second)
        idx = np.arange(cfg.params_per_map)
        for parity, (head, tail) in ((0, ("base", "ns_sp")), (1, ("dp", "ns_dp"))):
            sel = idx[idx % 2 == parity]
            for q, seg in ((head, first), (tail, second)):
                vals, labels, pidx, ics = parts[q]
                vals.append(seg[sel])
                labels.append(np.full(len(sel), j, dtype=np.uint8))
                pidx.append(sel.astype(np.uint16))
                ics.extend([tuple(ic)] * len(sel))
    out = {}
    for q, (vals, labels, pidx, ics) in parts.items():
        segment = Segment.FIRST_HALF if q in ("base", "dp") else Segment.SECOND_HALF
        out[q] = Quadrant(np.concatenate(vals), np.concatenate(labels),
                          np.concatenate(pidx), ics, slice_index, segment)
    return QuadrantSet(**out)


def build_dataset(cfg: DatasetConfig, specs: Sequence[MapSpec] = MAP_SPECS,
                  n_jobs: int | None = None) -> Dataset:
    """Generate every slice of a dataset.

    Each slice draws one IC per map; even grid indices go to BASE/NS-SP and
    odd ones to DP/NS-DP. Results do not depend on ``n_jobs``.
    """
    if cfg.params_per_map > 0xFFFF:
        raise ConfigError("params_per_map must fit in 16 bits")
    params = [_params_for(spec, cfg, j) for j, spec in enumerate(specs)]
    if n_jobs in (None, 1):
        slices = [_build_slice(cfg, specs, s, params) for s in range(cfg.slices)]
    else:
        from joblib import Parallel, delayed

        slices = Parallel(n_jobs=n_jobs)(
            delayed(_build_slice)(cfg, specs, s, params) for s in range(cfg.slices))
    return Dataset(cfg, slices, specs)


def write_dataset(dataset: Dataset, path) -> None:
    cfg = dataset.config
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, len(dataset.specs), cfg.params_per_map,
                              cfg.slices, cfg.series_len, cfg.master_seed, cfg.ic_width))
        for qs in dataset.slices:
            for qi, name in enumerate(QUADRANTS):
                quad = qs[name]
                for k in range(len(quad)):
                    fh.write(_RECORD.pack(int(quad.labels[k]), qi, quad.slice,
                                          int(quad.param_index[k])))
                    fh.write(np.asarray(quad.ics[k], dtype="<f8").tobytes())
                    fh.write(np.ascontiguousarray(quad.values[k], dtype="<f8").tobytes())


def read_dataset(path, specs: Sequence[MapSpec] = MAP_SPECS) -> Dataset:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}")
    if len(data) < _HEADER.size:
        raise CorruptionError(f"{path}: truncated header", len(data))
    _, version, n_maps, ppm, n_slices, series_len, seed, width = _HEADER.unpack_from(data)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")
    if n_maps != len(specs):
        raise FormatError(f"{path}: file holds {n_maps} maps, expected {len(specs)}")
    cfg = DatasetConfig(ppm, n_slices, series_len, width, seed)
    half = series_len // 2

    buckets = [{q: ([], [], [], []) for q in QUADRANTS} for _ in range(n_slices)]
    seen = [set() for _ in range(n_slices)]
    pos = _HEADER.size
    while pos < len(data):
        start = pos
        if pos + _RECORD.size > len(data):
            raise CorruptionError(f"{path}: truncated record header", start)
        label, qi, s, pidx = _RECORD.unpack_from(data, pos)
        if label >= n_maps or qi >= len(QUADRANTS) or s >= n_slices or pidx >= ppm:
            raise CorruptionError(f"{path}: invalid record fields "
                                  f"(label={label}, quadrant={qi}, slice={s}, param={pidx})", start)
        pos += _RECORD.size
        dim = specs[label].dimension
        end = pos + 8 * (dim + half)
        if end > len(data):
            raise CorruptionError(f"{path}: truncated record", start)
        ic = tuple(np.frombuffer(data, "<f8", dim, pos).tolist())
        vals = np.frombuffer(data, "<f8", half, pos + 8 * dim).astype(float)
        pos = end
        seen[s].add(qi)
        v, lab, pi, ics = buckets[s][QUADRANTS[qi]]
        v.append(vals)
        lab.append(label)
        pi.append(pidx)
        ics.append(ic)

    slices = []
    for s, bucket in enumerate(buckets):
        if not seen[s]:
            continue
        quads = {}
        for q, (v, lab, pi, ics) in bucket.items():
            segment = Segment.FIRST_HALF if q in ("base", "dp") else Segment.SECOND_HALF
            values = np.array(v) if v else np.empty((0, half))
            quads[q] = Quadrant(values, np.array(lab, dtype=np.uint8),
                                np.array(pi, dtype=np.uint16), ics, s, segment)
        slices.append(QuadrantSet(**quads))
    return Dataset(cfg, slices, specs)


def load_or_build(cfg: DatasetConfig, path=None) -> Dataset:
    """Read ``path`` if it exists and matches ``cfg``; otherwise build (and save)."""
    import os

    if path is not None and os.path.exists(path):
        ds = read_dataset(path)
        if _header_key(ds.config) == _header_key(cfg):
            ds.config = cfg
            return ds
    ds = build_dataset(cfg)
    if path is not None:
        write_dataset(ds, path)
    return ds
