import csv

import numpy as np
import pytest

from tssc.cli import main
from tssc.experiments import (ExperimentConfig, ExperimentReport, ExperimentRunner, figure_series,
                              render_figures, write_reports)
from tssc.maps import MAP_SPECS
from tssc.grids import dcr_heatmap, read_pgm, tssc_heatmap
from tssc.triads import forbidden_band_fraction, triad_sequence

TINY = dict(params_per_map=4, slices=1, series_len=200, epochs=2, batch_size=8, grid_size=16)


def test_report_rejects_duplicates_and_bad_accuracy():
    rep = ExperimentReport("E1_control_params", "DP")
    rep.add(0, "tssc", 0.5)
    with pytest.raises(ValueError):
        rep.add(0, "tssc", 0.6)
    with pytest.raises(ValueError):
        rep.add(1, "ts", 1.5)


def test_report_csv_columns(tmp_path):
    rep = ExperimentReport("E1_control_params", "DP")
    rep.add(0, "tssc", 0.75)
    write_reports([rep], tmp_path / "r.csv")
    with open(tmp_path / "r.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["experiment", "trial", "i", "classifier", "accuracy"]
    assert float(rows[0]["accuracy"]) == 0.75


def test_single_map_is_trivially_classified():
    cfg = ExperimentConfig.for_scale("desk", indices=(0,), maps=("logistic",), **TINY)
    rep = ExperimentRunner(cfg).run_e1()
    assert not rep.failures
    assert [r["accuracy"] for r in rep.rows] == [1.0, 1.0, 1.0]


def test_runs_are_reproducible():
    cfg = ExperimentConfig.for_scale("desk", indices=(0,), classifiers=("tssc",),
                                     maps=("logistic", "cat"), **TINY)
    a, b = ExperimentRunner(cfg).run_e3(), ExperimentRunner(cfg).run_e3()
    assert [r.rows for r in a] == [r.rows for r in b]


def test_every_configured_pair_yields_one_row():
    cfg = ExperimentConfig.for_scale("desk", classifiers=("dcr", "tssc"), **TINY)
    a, b = ExperimentRunner(cfg).run_e2()
    for rep in (a, b):
        assert len(rep.rows) + len(rep.failures) == 10


def test_render_figures(tmp_path):
    paths = render_figures(tmp_path, length=500, grid_size=16)
    assert len(paths) == 18 == len(list(tmp_path.glob("*.pgm")))
    assert read_pgm(tmp_path / "logistic_tssc.pgm").shape == (16, 16)


def test_logistic_figure_has_forbidden_bands():
    assert forbidden_band_fraction(triad_sequence(figure_series("logistic")), 0.05) < 0.01


def test_cat_map_tssc_more_structured_than_dcr():
    # Compare occupancy distributions; the max-scaled image is dominated by one peak cell.
    x = figure_series("cat")
    assert tssc_heatmap(x, norm="sum").cells.var() > 2 * dcr_heatmap(x, norm="sum").cells.var()


def test_cli_pipeline(tmp_path, capsys):
    ds = str(tmp_path / "d1.tssd")
    assert main(["generate", "--dataset", "D1", "--params-per-map", "4", "--slices", "1",
                 "--series-len", "200", "--out", ds]) == 0
    npz = tmp_path / "h.npz"
    assert main(["encode", "--method", "dcr", "--grid", "16", "--in", ds, "--out", str(npz)]) == 0
    with np.load(npz) as z:
        assert z["base_X"].shape == (2 * len(MAP_SPECS), 16, 16)
    model = str(tmp_path / "m.tssm")
    assert main(["train", "--classifier", "tssc", "--grid", "16", "--epochs", "1", "--in", ds,
                 "--out", model, "--metrics", str(tmp_path / "h.csv")]) == 0
    assert main(["eval", "--model", model, "--in", ds, "--test-quadrant", "dp"]) == 0
    assert "tssc accuracy on dp" in capsys.readouterr().out


def test_cli_errors_are_reported(tmp_path, capsys):
    assert main(["eval", "--model", str(tmp_path / "missing.tssm"), "--in", "x.tssd"]) == 1
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["generate", "--dataset", "D9", "--out", "x"])
