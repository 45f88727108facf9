import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tssc.exceptions import DomainError, NumericError
from tssc.maps import get_spec, iterate_map, normalize
from tssc.triads import (PATTERNS, bandt_pompe, forbidden_band_fraction, ordinal_pattern,
                         ordinal_patterns, permutation_entropy, polar, triad_sequence)


def sector_pattern(theta):
    """Ordinal pattern implied by the angle of (dx, dy) alone."""
    if 0 < theta < math.pi / 2:
        return 123
    if math.pi / 2 < theta < 3 * math.pi / 4:
        return 213
    if 3 * math.pi / 4 < theta < math.pi:
        return 231
    if -math.pi < theta < -math.pi / 2:
        return 321
    if -math.pi / 2 < theta < -math.pi / 4:
        return 312
    if -math.pi / 4 < theta < 0:
        return 132
    raise AssertionError(theta)


@pytest.mark.parametrize("triad,R,theta", [
    ((1.9, 2.0, 3.0), 1.005, 1.471),
    ((2.1, 2.0, 3.0), 1.005, 1.670),
    ((2.9, 2.0, 3.0), 1.345, 2.303),
])
def test_worked_polar_examples(triad, R, theta):
    p = triad_sequence(triad)[0]
    dx, dy = triad[1] - triad[0], triad[2] - triad[1]
    assert p.R == math.hypot(dx, dy)
    assert p.theta == math.atan2(dy, dx)
    # published values carry three decimals (the last one truncated, 2.30361 -> 2.303)
    assert p.R == pytest.approx(R, abs=1e-3)
    assert p.theta == pytest.approx(theta, abs=1e-3)


def test_degenerate_triad():
    p = triad_sequence([0.0, 0.0, 0.0])[0]
    assert (p.R, p.theta) == (0.0, 0.0)
    assert p.pattern == 123


def test_theta_half_open():
    R, theta = polar([-1.0], [0.0])
    assert theta[0] == -math.pi
    R, theta = polar([-1.0], [-0.0])
    assert theta[0] == -math.pi


@pytest.mark.parametrize("triad,code", [((8, 2, 5), 231), ((1, 2, 3), 123), ((3, 2, 1), 321),
                                        ((1, 1, 2), 123), ((2.1, 2.0, 3.0), 213)])
def test_ordinal_pattern(triad, code):
    assert ordinal_pattern(triad) == code


def test_ordinal_pattern_rejects_nan():
    with pytest.raises(NumericError):
        ordinal_pattern((1.0, float("nan"), 2.0))


def test_sequence_length_and_errors():
    assert len(triad_sequence(np.arange(10.0))) == 8
    with pytest.raises(DomainError):
        triad_sequence([1.0, 2.0])
    with pytest.raises(DomainError):
        bandt_pompe([1.0, 2.0])


def test_sector_pattern_agreement(rng):
    triads = rng.uniform(-1, 1, (20000, 3))
    d = np.diff(triads, axis=1)
    ok = (d[:, 0] != 0) & (d[:, 1] != 0) & (d.sum(axis=1) != 0)
    triads = triads[ok]
    for t in triads[:2000]:
        p = triad_sequence(t)[0]
        assert p.pattern == sector_pattern(p.theta)


def test_bandt_pompe_examples():
    d = bandt_pompe(np.arange(20.0))
    assert d.probs.tolist() == [1, 0, 0, 0, 0, 0]
    alt = [0, 1, 0, 1, 0, 1]
    # enumerate triads by hand
    manual = {}
    for i in range(len(alt) - 2):
        w = alt[i:i + 3]
        code = int("".join(str(k + 1) for k in sorted(range(3), key=lambda k: (w[k], k))))
        manual[code] = manual.get(code, 0) + 1
    assert manual == {132: 2, 213: 2}
    d = bandt_pompe(alt)
    assert d[132] == 0.5 and d[213] == 0.5 and d.count == 4
    assert sum(d.as_dict().values()) == 1.0


def test_bandt_pompe_iid_uniform(rng):
    d = bandt_pompe(rng.random(100_000))
    assert np.all(np.abs(d.probs - 1 / 6) < 0.01)


@pytest.mark.parametrize("probs,h", [
    ([1 / 6] * 6, math.log(6)),
    ([1, 0, 0, 0, 0, 0], 0.0),
    ([0.5, 0.5, 0, 0, 0, 0], math.log(2)),
])
def test_permutation_entropy(probs, h):
    assert permutation_entropy(probs) == pytest.approx(h, abs=1e-12)
    assert permutation_entropy(probs, normalized=True) == pytest.approx(h / math.log(6), abs=1e-12)


def test_forbidden_band_examples():
    assert forbidden_band_fraction(np.zeros(10), 0.1) == 0.0
    assert forbidden_band_fraction(np.array([math.pi / 2]), 0.01) == 1.0
    with pytest.raises(DomainError):
        forbidden_band_fraction(np.array([]), 0.1)
    with pytest.raises(DomainError):
        forbidden_band_fraction(np.zeros(3), 1.0)


def test_logistic_forbidden_bands():
    x = normalize(iterate_map(get_spec("logistic"), [4.0], [1e-6], 1000).values)
    assert forbidden_band_fraction(triad_sequence(x), 0.05) < 0.01


finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


@settings(max_examples=200)
@given(st.lists(finite, min_size=3, max_size=30), st.integers(-64, 64))
def test_shift_invariance(values, shift):
    # integer shifts of dyadic-friendly values keep differences exact
    x = np.round(np.asarray(values) * 8) / 8
    a, b = triad_sequence(x), triad_sequence(x + shift)
    for col in ("dx", "dy", "R", "theta", "pattern"):
        assert getattr(a, col).tobytes() == getattr(b, col).tobytes()


@settings(max_examples=200)
@given(st.lists(finite, min_size=3, max_size=30), st.floats(0.01, 100))
def test_positive_scaling(values, s):
    x = np.asarray(values)
    a, b = triad_sequence(x), triad_sequence(x * s)
    np.testing.assert_allclose(b.R, a.R * s, rtol=1e-9, atol=1e-9 * s)
    assert np.array_equal(a.pattern, b.pattern)
    big = a.R > 1e-6
    np.testing.assert_allclose(b.theta[big], a.theta[big], atol=1e-9)


@settings(max_examples=100)
@given(st.lists(finite, min_size=3, max_size=60))
def test_invariants(values):
    seq = triad_sequence(values)
    assert len(seq) == len(values) - 2
    assert np.all(seq.theta >= -math.pi) and np.all(seq.theta < math.pi)
    assert np.all(seq.R >= 0)
    scale = np.maximum(np.maximum(np.abs(seq.dx), np.abs(seq.dy)), np.finfo(float).tiny)
    direct = scale * np.sqrt((seq.dx / scale) ** 2 + (seq.dy / scale) ** 2)
    np.testing.assert_allclose(seq.R, direct, rtol=4 * np.finfo(float).eps)
    assert np.all(seq.theta[seq.R == 0] == 0)
    assert set(np.unique(seq.pattern)) <= set(PATTERNS)
    d = bandt_pompe(values)
    assert np.all(d.probs >= 0) and abs(d.probs.sum() - 1) < 1e-12
    assert np.array_equal(ordinal_patterns(values), seq.pattern)


def test_batched_ordinal_pattern():
    t = np.array([[8, 2, 5], [1, 2, 3], [1, 1, 2]])
    assert ordinal_pattern(t).tolist() == [231, 123, 123]
