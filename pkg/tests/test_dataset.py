import numpy as np
import pytest

from tssc.dataset import (QUADRANTS, Dataset, DatasetConfig, build_dataset, read_dataset,
                          sample_control_params, write_dataset)
from tssc.exceptions import ConfigError, CorruptionError, FormatError
from tssc.maps import MAP_SPECS, get_spec, iterate_map


def small_cfg(**kw):
    base = dict(params_per_map=4, slices=2, series_len=40, ic_width=0.3, master_seed=7)
    base.update(kw)
    return DatasetConfig(**base)


def test_sample_logistic_grid():
    r = sample_control_params(get_spec("logistic"), 4)[:, 0]
    assert r.tolist() == [3.5, 3.625, 3.75, 3.875]


def test_sample_lozi_grid():
    p = sample_control_params(get_spec("lozi"), 4)
    np.testing.assert_allclose(p, [[1.6, 0.4], [1.6, 0.5], [1.7, 0.4], [1.7, 0.5]], atol=1e-12)


def test_sample_half_open_range():
    for spec in MAP_SPECS:
        if len(spec.free_params) != 1:
            continue
        p = sample_control_params(spec, 1024)
        free = [k for k, r in enumerate(spec.param_ranges) if not r.fixed][0]
        vals = p[:, free]
        assert len(np.unique(vals)) == 1024
        assert vals.max() < spec.param_ranges[free].upper


def test_lcg_fixed_params_carried():
    p = sample_control_params(get_spec("lcg"), 4)
    assert np.all(p[:, 0] == 7141) and np.all(p[:, 1] == 54773)


def test_two_param_needs_square():
    with pytest.raises(ConfigError):
        sample_control_params(get_spec("lozi"), 8)


def test_lozi_grid_stays_bounded_with_1024_points():
    spec = get_spec("lozi")
    p = sample_control_params(spec, 1024)
    assert np.all(2 * p[:, 0] + p[:, 1] < 4)
    x = iterate_map(spec, p[-1], spec.base_ic, 2000).values
    assert np.all(np.abs(x) < 10)


def test_random_sampling_in_range():
    p = sample_control_params(get_spec("chirikov"), 50, np.random.default_rng(0))
    assert np.all((p >= 1.0) & (p < 5.0))


def test_config_validation():
    with pytest.raises(ConfigError):
        DatasetConfig(params_per_map=5)
    with pytest.raises(ConfigError):
        DatasetConfig(series_len=101)
    cfg = DatasetConfig.for_index(3, params_per_map=16, slices=4)
    assert cfg.ic_width == 0.3 and cfg.slices == 4
    assert DatasetConfig.for_index(0, slices=32).slices == 1


def test_quadrant_structure():
    ds = build_dataset(small_cfg())
    assert len(ds.slices) == 2
    for qs in ds.slices:
        for name in QUADRANTS:
            q = qs[name]
            assert len(q) == 9 * 2
            assert q.values.shape == (18, 20)
            assert np.bincount(q.labels, minlength=9).tolist() == [2] * 9
            assert q.values.min() >= -1 and q.values.max() <= 1
        assert np.all(qs.base.param_index % 2 == 0) and np.all(qs.dp.param_index % 2 == 1)
        assert np.array_equal(qs.base.param_index, qs.ns_sp.param_index)
        assert np.array_equal(qs.dp.param_index, qs.ns_dp.param_index)


def test_desk_scale_counts():
    ds = build_dataset(DatasetConfig(params_per_map=64, slices=1, series_len=2000))
    for name in QUADRANTS:
        assert ds.slices[0][name].values.shape == (288, 1000)


def test_segments_reconstruct_full_series():
    cfg = small_cfg(normalize_segments=False)
    ds = build_dataset(cfg)
    params = ds.control_params()
    qs = ds.slices[1]
    for head, tail in (("base", "ns_sp"), ("dp", "ns_dp")):
        for k in range(len(qs[head])):
            label = qs[head].labels[k]
            spec = MAP_SPECS[label]
            p = params[label][qs[head].param_index[k]]
            full = iterate_map(spec, p, qs[head].ics[k], cfg.series_len).values
            joined = np.concatenate([qs[head].values[k], qs[tail].values[k]])
            assert joined.tobytes() == full.tobytes()


def test_one_ic_per_map_per_slice():
    ds = build_dataset(small_cfg())
    for qs in ds.slices:
        for label in range(9):
            ics = {qs.base.ics[k] for k in np.flatnonzero(qs.base.labels == label)}
            assert len(ics) == 1
    # slices differ when the IC interval has width
    assert ds.slices[0].base != ds.slices[1].base


def test_zero_width_slices_identical():
    ds = build_dataset(small_cfg(ic_width=0.0))
    a, b = ds.slices
    assert a.base.values.tobytes() == b.base.values.tobytes()


def test_seed_determinism_and_jobs():
    a = build_dataset(small_cfg())
    b = build_dataset(small_cfg(), n_jobs=2)
    assert a == b
    c = build_dataset(small_cfg(master_seed=8))
    assert a != c


def test_round_trip(tmp_path):
    ds = build_dataset(small_cfg())
    path = tmp_path / "d.tssd"
    write_dataset(ds, path)
    assert read_dataset(path) == ds
    # header + fixed-size records
    n_rec = 2 * 4 * 18
    dims = sum(s.dimension for s in MAP_SPECS) * 2 * 4 * 2
    assert path.stat().st_size == 36 + n_rec * (6 + 8 * 20) + 8 * dims


def test_empty_round_trip(tmp_path):
    ds = Dataset(small_cfg(), [])
    write_dataset(ds, tmp_path / "e.tssd")
    assert (tmp_path / "e.tssd").stat().st_size == 36
    assert read_dataset(tmp_path / "e.tssd") == ds


def test_corruption_detected(tmp_path):
    ds = build_dataset(small_cfg())
    path = tmp_path / "d.tssd"
    write_dataset(ds, path)
    raw = bytearray(path.read_bytes())

    flipped = bytearray(raw)
    flipped[36 + 6 + 8 + 3] ^= 0xFF  # inside the first record's values
    (tmp_path / "f.tssd").write_bytes(flipped)
    assert read_dataset(tmp_path / "f.tssd") != ds

    (tmp_path / "t.tssd").write_bytes(raw[:-5])
    with pytest.raises(CorruptionError, match="byte offset"):
        read_dataset(tmp_path / "t.tssd")

    bad = bytearray(raw)
    bad[:4] = b"XXXX"
    (tmp_path / "m.tssd").write_bytes(bad)
    with pytest.raises(FormatError):
        read_dataset(tmp_path / "m.tssd")

    bad = bytearray(raw)
    bad[4] = 9
    (tmp_path / "v.tssd").write_bytes(bad)
    with pytest.raises(FormatError):
        read_dataset(tmp_path / "v.tssd")


def test_pooled():
    ds = build_dataset(small_cfg())
    X, y = ds.pooled("dp")
    assert X.shape == (36, 20) and y.shape == (36,)
