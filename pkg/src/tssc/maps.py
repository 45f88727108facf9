"""Surrogate time series from nine discrete chaotic maps.

Every map is iterated in float64 with numpy, vectorised over a batch of
parameter vectors, so a single series and a batch of series follow the exact
same arithmetic and give bit-identical values.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .exceptions import DomainError, NumericError

TWO_PI = 2.0 * math.pi

# Rotation angle of the chaotic web map. pi/2 gives the four-fold symmetric web.
WEB_MAP_ALPHA = math.pi / 2


class MapId(enum.IntEnum):
    LOGISTIC = 0
    LCG = 1
    SKEW_TENT = 2
    LOZI = 3
    DISSIPATIVE_STANDARD = 4
    SINAI = 5
    CAT = 6
    CHIRIKOV = 7
    WEB = 8


class Segment(enum.Enum):
    FULL = "full"
    FIRST_HALF = "first_half"
    SECOND_HALF = "second_half"


def wrap(x, modulus):
    """Non-negative remainder, guaranteed to land in ``[0, modulus)``."""
    r = np.mod(x, modulus)
    # np.mod(-1e-20, 1.0) rounds to 1.0
    return np.where(r >= modulus, 0.0, r)


# Each step function maps (state tuple of arrays, params (m, p)) -> new state.
def _logistic(s, p):
    (x,) = s
    return (p[:, 0] * x * (1.0 - x),)


def _lcg(s, p):
    (x,) = s
    return (wrap(p[:, 0] * x + p[:, 1], p[:, 2]),)


def _skew_tent(s, p):
    (x,) = s
    w = p[:, 0]
    return (np.where(x <= w, x / w, (1.0 - x) / (1.0 - w)),)


def _lozi(s, p):
    x, y = s
    return 1.0 - p[:, 0] * np.abs(x) + p[:, 1] * y, x


def _dissipative_standard(s, p):
    x, y = s
    y1 = wrap(p[:, 0] * y + p[:, 1] * np.sin(x), TWO_PI)
    return wrap(x + y1, TWO_PI), y1


def _sinai(s, p):
    x, y = s
    x1 = wrap(x + y + p[:, 0] * np.cos(TWO_PI * y), 1.0)
    return x1, wrap(x + 2.0 * y, 1.0)


def _cat(s, p):
    x, y = s
    return wrap(x + y, 1.0), wrap(x + p[:, 0] * y, 1.0)


def _chirikov(s, p):
    x, y = s
    y1 = wrap(y + p[:, 0] * np.sin(x), TWO_PI)
    return wrap(x + y1, TWO_PI), y1


def _web(s, p, alpha=WEB_MAP_ALPHA):
    x, y = s
    kick = y + p[:, 0] * np.sin(x)
    ca, sa = math.cos(alpha), math.sin(alpha)
    return x * ca - kick * sa, x * sa + kick * ca


@dataclass(frozen=True)
class ParamRange:
    name: str
    lower: float
    upper: float
    # Parameters held fixed (e.g. the LCG multiplier) have lower == upper.

    @property
    def fixed(self) -> bool:
        return self.lower == self.upper

    def contains(self, value: float) -> bool:
        # closed on both ends for validation; sampling grids stay half-open
        return self.lower <= value <= self.upper


@dataclass(frozen=True)
class MapSpec:
    """Definition of one chaotic map: recurrence, parameter box, base IC."""

    map_id: MapId
    name: str
    step: Callable
    param_ranges: tuple[ParamRange, ...]
    base_ic: tuple[float, ...]
    observed_coordinate: int = 0
    # Optional upper bound on one parameter as a function of the others,
    # used where part of the box has no bounded attractor.
    upper_bound: Callable[[dict], dict] | None = field(default=None, compare=False)
    # Period of each coordinate for maps living on a torus, else None.
    periods: tuple[float | None, ...] | None = None

    @property
    def dimension(self) -> int:
        return len(self.base_ic)

    @property
    def free_params(self) -> list[ParamRange]:
        return [r for r in self.param_ranges if not r.fixed]

    def effective_upper(self, values: dict) -> dict:
        uppers = {r.name: r.upper for r in self.param_ranges}
        if self.upper_bound is not None:
            for name, bound in self.upper_bound(values).items():
                uppers[name] = min(uppers[name], bound)
        return uppers

    def check_params(self, params: Sequence[float]) -> None:
        if len(params) != len(self.param_ranges):
            raise DomainError(
                f"{self.name}: expected {len(self.param_ranges)} parameters, got {len(params)}"
            )
        values = {r.name: float(v) for r, v in zip(self.param_ranges, params)}
        uppers = self.effective_upper(values)
        for r, v in zip(self.param_ranges, params):
            ok = r.contains(v) and v <= uppers[r.name]
            if not ok:
                raise DomainError(
                    f"{self.name}: parameter {r.name}={v!r} outside "
                    f"[{r.lower}, {uppers[r.name]}]"
                )


def _lozi_upper(values):
    # The Lozi attractor only exists for 2a + b < 4; beyond it orbits escape.
    return {"b": 4.0 - 2.0 * values["a"]}


MAP_SPECS: tuple[MapSpec, ...] = (
    MapSpec(MapId.LOGISTIC, "logistic", _logistic,
            (ParamRange("r", 3.5, 4.0),), (1e-6,)),
    MapSpec(MapId.LCG, "lcg", _lcg,
            (ParamRange("A", 7141.0, 7141.0), ParamRange("B", 54773.0, 54773.0),
             ParamRange("C", 259200.0, 600000.0)), (0.0,)),
    MapSpec(MapId.SKEW_TENT, "skew_tent", _skew_tent,
            (ParamRange("w", 0.11, 0.9),), (0.1,)),
    MapSpec(MapId.LOZI, "lozi", _lozi,
            (ParamRange("a", 1.6, 1.8), ParamRange("b", 0.4, 0.6)), (-0.1, 0.1),
            upper_bound=_lozi_upper),
    MapSpec(MapId.DISSIPATIVE_STANDARD, "dissipative_standard", _dissipative_standard,
            (ParamRange("b", 0.1, 1.0), ParamRange("k", 1.0, 10.0)), (0.1, 0.1),
            periods=(TWO_PI, TWO_PI)),
    MapSpec(MapId.SINAI, "sinai", _sinai,
            (ParamRange("delta", 0.1, 1.0),), (0.9, 0.5), periods=(1.0, 1.0)),
    MapSpec(MapId.CAT, "cat", _cat,
            (ParamRange("k", 1.0, 10.0),), (0.0, 1.0 / math.sqrt(2.0)),
            periods=(1.0, 1.0)),
    MapSpec(MapId.CHIRIKOV, "chirikov", _chirikov,
            (ParamRange("k", 1.0, 5.0),), (0.0, 6.0),
            periods=(TWO_PI, TWO_PI)),
    MapSpec(MapId.WEB, "web", _web,
            (ParamRange("k", 1.0, 5.0),), (0.0, 3.0)),
)


def get_spec(map_id) -> MapSpec:
    if isinstance(map_id, str):
        for spec in MAP_SPECS:
            if spec.name == map_id:
                return spec
        raise DomainError(f"unknown map {map_id!r}")
    return MAP_SPECS[MapId(map_id)]


@dataclass
class TimeSeries:
    values: np.ndarray
    map_id: MapId | None = None
    params: tuple[float, ...] = ()
    ic: tuple[float, ...] = ()
    segment: Segment = Segment.FULL

    def __len__(self):
        return len(self.values)

    def with_values(self, values, segment=None) -> "TimeSeries":
        return TimeSeries(np.asarray(values, dtype=float), self.map_id, self.params,
                          self.ic, self.segment if segment is None else segment)


def iterate_batch(spec: MapSpec, params, ic, n: int, check: bool = True) -> np.ndarray:
    """Iterate ``spec`` for every row of ``params``; returns shape ``(m, n)``.

    ``ic`` is either one initial condition shared by all rows or an ``(m, dim)``
    array. Only the observed coordinate is recorded.
    """
    params = np.atleast_2d(np.asarray(params, dtype=float))
    m = params.shape[0]
    if n < 3:
        raise DomainError(f"need n >= 3 iterates, got {n}")
    if check:
        for row in params:
            spec.check_params(row)
    ic = np.asarray(ic, dtype=float)
    if ic.ndim == 1:
        ic = np.broadcast_to(ic, (m, ic.shape[0]))
    if ic.shape != (m, spec.dimension):
        raise DomainError(f"{spec.name}: initial condition shape {ic.shape} does not fit")

    state = tuple(ic[:, j].copy() for j in range(spec.dimension))
    out = np.empty((m, n))
    obs = spec.observed_coordinate
    out[:, 0] = state[obs]
    with np.errstate(all="ignore"):
        for t in range(1, n):
            state = spec.step(state, params)
            x = state[obs]
            if not np.all(np.isfinite(x)):
                bad = int(np.flatnonzero(~np.isfinite(x))[0])
                exc = NumericError(
                    f"{spec.name}: non-finite value at step {t + 1} "
                    f"(params {tuple(params[bad])})"
                )
                exc.row = bad
                raise exc
            out[:, t] = x
    return out


def iterate_map(spec: MapSpec, params: Sequence[float], ic: Sequence[float], n: int) -> TimeSeries:
    """Raw series of ``n`` values starting at ``ic``; no transient is dropped."""
    values = iterate_batch(spec, [params], ic, n)[0]
    return TimeSeries(values, spec.map_id, tuple(float(p) for p in params),
                      tuple(float(c) for c in ic))


def normalize(values: np.ndarray) -> np.ndarray:
    """Min-max scale the last axis to ``[-1, 1]``; constant rows become 0."""
    values = np.asarray(values, dtype=float)
    lo = values.min(axis=-1, keepdims=True)
    hi = values.max(axis=-1, keepdims=True)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = 2.0 * (values - lo) / safe - 1.0
    out = np.where(span > 0, out, 0.0)
    # keep the endpoints exact
    return np.clip(out, -1.0, 1.0)


def normalize_series(ts: TimeSeries) -> TimeSeries:
    if len(ts) == 0:
        raise DomainError("cannot normalise an empty series")
    return ts.with_values(normalize(ts.values))


def perturb_ic(spec: MapSpec, width: float, rng: np.random.Generator) -> tuple[float, ...]:
    """Replace the observed coordinate of the base IC by a draw from ``[c0, c0 + width)``.

    On maps defined on a torus the draw is reduced modulo the period, so the
    first emitted value already lies in the map's domain.
    """
    if width < 0:
        raise DomainError(f"IC perturbation width must be >= 0, got {width}")
    ic = list(spec.base_ic)
    c0 = ic[spec.observed_coordinate]
    u = rng.random()
    value = c0 + width * u
    if spec.periods is not None:
        value = float(wrap(value, spec.periods[spec.observed_coordinate]))
    ic[spec.observed_coordinate] = value
    return tuple(ic)
