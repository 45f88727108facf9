import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tssc.exceptions import DomainError
from tssc.maps import (MAP_SPECS, MapId, TWO_PI, get_spec, iterate_map, normalize,
                       normalize_series, perturb_ic, wrap)
from tssc.dataset import sample_control_params


def test_logistic_first_iterates():
    ts = iterate_map(get_spec("logistic"), [4.0], [1e-6], 3)
    x1 = 1e-6
    x2 = 4.0 * x1 * (1 - x1)
    x3 = 4.0 * x2 * (1 - x2)
    assert ts.values.tolist() == [x1, x2, x3]
    assert ts.values[1] == pytest.approx(3.999996e-6, rel=1e-12)
    assert ts.values[2] == pytest.approx(1.5999920e-5, rel=1e-7)


def test_cat_map_one_step():
    ts = iterate_map(get_spec("cat"), [2.0], [0.0, 1 / math.sqrt(2)], 3)
    assert ts.values[0] == 0.0
    assert ts.values[1] == pytest.approx(0.70710678, abs=1e-8)


def test_lcg_matches_integer_arithmetic():
    A, B, C = 7141, 54773, 259200
    expected = [0]
    for _ in range(9):
        expected.append((A * expected[-1] + B) % C)
    ts = iterate_map(get_spec("lcg"), [A, B, C], [0.0], 10)
    assert expected[:3] == [0, 54773, 55966]
    assert ts.values.tolist() == [float(v) for v in expected]


def test_parameter_out_of_range():
    with pytest.raises(DomainError):
        iterate_map(get_spec("logistic"), [4.0001], [0.1], 5)
    with pytest.raises(DomainError):
        iterate_map(get_spec("lcg"), [7000, 54773, 300000], [0.0], 5)
    with pytest.raises(DomainError):
        iterate_map(get_spec("skew_tent"), [0.95], [0.1], 5)
    # the range end itself is accepted (e.g. the chaotic logistic r = 4)
    iterate_map(get_spec("logistic"), [4.0], [0.1], 5)


def test_short_series_rejected():
    with pytest.raises(DomainError):
        iterate_map(get_spec("logistic"), [3.9], [0.1], 2)


def test_table_settings():
    logistic = get_spec("logistic")
    assert (logistic.param_ranges[0].lower, logistic.param_ranges[0].upper) == (3.5, 4.0)
    assert logistic.base_ic == (1e-6,)
    tent = get_spec("skew_tent")
    assert (tent.param_ranges[0].lower, tent.param_ranges[0].upper) == (0.11, 0.9)
    assert get_spec("cat").base_ic == (0.0, 1 / math.sqrt(2))
    assert get_spec("chirikov").base_ic == (0.0, 6.0)
    assert get_spec("lozi").base_ic == (-0.1, 0.1)
    assert [s.map_id for s in MAP_SPECS] == list(MapId)
    assert all(s.observed_coordinate == 0 for s in MAP_SPECS)


def test_wrap_never_returns_modulus():
    assert wrap(-1e-20, 1.0) == 0.0
    assert wrap(-0.25, 1.0) == 0.75
    assert wrap(7.0, TWO_PI) == pytest.approx(7.0 - TWO_PI)


@pytest.mark.parametrize("name,hi", [("cat", 1.0), ("sinai", 1.0), ("chirikov", TWO_PI),
                                     ("dissipative_standard", TWO_PI)])
def test_mod_maps_stay_in_domain(name, hi):
    spec = get_spec(name)
    for params in sample_control_params(spec, 16):
        x = iterate_map(spec, params, spec.base_ic, 2000).values
        assert x.min() >= 0.0 and x.max() < hi


def test_logistic_stays_in_unit_interval():
    x = iterate_map(get_spec("logistic"), [4.0], [0.3], 5000).values
    assert x.min() >= 0 and x.max() <= 1


def test_every_map_bounded_over_its_grid():
    for spec in MAP_SPECS:
        for params in sample_control_params(spec, 64):
            x = iterate_map(spec, params, spec.base_ic, 2000).values
            assert np.all(np.isfinite(x))


def test_determinism():
    spec = get_spec("sinai")
    a = iterate_map(spec, [0.5], spec.base_ic, 500).values
    b = iterate_map(spec, [0.5], spec.base_ic, 500).values
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("values,expected", [
    ([1, 2, 3], [-1, 0, 1]),
    ([5, 5, 5], [0, 0, 0]),
    ([-2, 0, 2], [-1, 0, 1]),
])
def test_normalize_examples(values, expected):
    assert normalize(values).tolist() == expected


def test_normalize_series_keeps_provenance():
    ts = iterate_map(get_spec("logistic"), [3.9], [0.2], 50)
    out = normalize_series(ts)
    assert out.map_id == ts.map_id and out.params == ts.params
    assert out.values.min() == -1 and out.values.max() == 1


@settings(max_examples=200)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=50))
def test_normalize_idempotent_and_bounded(values):
    once = normalize(values)
    twice = normalize(once)
    assert np.all(once >= -1) and np.all(once <= 1)
    assert np.all(np.abs(twice - once) <= np.finfo(float).eps * np.maximum(1, np.abs(once)))


def test_perturb_ic():
    spec = get_spec("logistic")
    assert perturb_ic(spec, 0.0, np.random.default_rng(0)) == spec.base_ic
    for seed in range(50):
        (x1,) = perturb_ic(spec, 0.5, np.random.default_rng(seed))
        assert 1e-6 <= x1 < 0.5 + 1e-6
    a = perturb_ic(spec, 0.3, np.random.default_rng(42))
    b = perturb_ic(spec, 0.3, np.random.default_rng(42))
    assert a == b
    cat = get_spec("cat")
    x, y = perturb_ic(cat, 0.2, np.random.default_rng(1))
    assert y == cat.base_ic[1] and 0 <= x < 0.2
    with pytest.raises(DomainError):
        perturb_ic(spec, -0.1, np.random.default_rng(0))


def test_perturbed_ic_wrapped_onto_torus():
    sinai = get_spec("sinai")
    for seed in range(30):
        x, y = perturb_ic(sinai, 0.5, np.random.default_rng(seed))
        assert 0 <= x < 1 and y == 0.5
        lifted = x if x >= 0.9 else x + 1.0
        assert 0.9 <= lifted < 1.4 + 1e-12
        series = iterate_map(sinai, [0.3], (x, y), 50).values
        assert series.min() >= 0 and series.max() < 1
