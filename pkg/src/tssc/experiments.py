"""The three benchmark experiments (control parameters, initial conditions, segmentation)."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.pipeline import Pipeline

from .convnet import ConvNetClassifier
from .dataset import Dataset, DatasetConfig, build_dataset, read_dataset, write_dataset
from .encoders import DCREncoder, TSSCEncoder
from .exceptions import ConfigError, TSSCError
from .grids import dcr_heatmap, export_pgm, tssc_heatmap
from .maps import MAP_SPECS, MapSpec, get_spec, iterate_map, normalize

log = logging.getLogger(__name__)

CLASSIFIERS = ("ts", "dcr", "tssc")
REPORT_COLUMNS = ["experiment", "trial", "i", "classifier", "accuracy"]

# Parameter values shown for each map in the gallery of example images.
FIGURE_PARAMS = {
    "logistic": [4.0],
    "lcg": [7141.0, 54773.0, 259200.0],
    "skew_tent": [0.8],
    "lozi": [1.7, 0.5],
    "dissipative_standard": [0.1, 8.8],
    "sinai": [0.1],
    "cat": [2.0],
    "chirikov": [1.0],
    "web": [1.0],
}


@dataclass(frozen=True)
class ExperimentConfig:
    scale: str = "desk"
    params_per_map: int = 64
    slices: int = 2
    series_len: int = 2000
    epochs: int = 15
    batch_size: int = 64
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    seed: int = 0
    grid_size: int = 64
    indices: tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    classifiers: tuple[str, ...] = CLASSIFIERS
    cache_dir: str | None = None
    # Subset of map names; None means all nine.
    maps: tuple[str, ...] | None = None

    @classmethod
    def for_scale(cls, scale: str, **overrides) -> "ExperimentConfig":
        if scale == "desk":
            base = cls()
        elif scale == "paper":
            base = cls(scale="paper", params_per_map=1024, slices=32, epochs=30)
        else:
            raise ConfigError(f"unknown scale {scale!r}")
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(base, **overrides)

    def dataset_config(self, i: int) -> DatasetConfig:
        return DatasetConfig.for_index(i, self.params_per_map, self.slices, self.series_len,
                                       self.seed)

    def specs(self) -> tuple[MapSpec, ...]:
        if self.maps is None:
            return MAP_SPECS
        return tuple(get_spec(name) for name in self.maps)

    def snapshot(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ExperimentReport:
    experiment: str
    trial: str
    rows: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    wall_clock: float = 0.0
    failures: list[dict] = field(default_factory=list)

    def add(self, i: int, classifier: str, accuracy: float) -> None:
        if any(r["i"] == i and r["classifier"] == classifier for r in self.rows):
            raise ValueError(f"duplicate row ({i}, {classifier})")
        if not 0.0 <= accuracy <= 1.0:
            raise ValueError(f"accuracy {accuracy} outside [0, 1]")
        self.rows.append({"experiment": self.experiment, "trial": self.trial, "i": i,
                          "classifier": classifier, "accuracy": accuracy})

    def accuracy(self, i: int, classifier: str) -> float:
        for r in self.rows:
            if r["i"] == i and r["classifier"] == classifier:
                return r["accuracy"]
        raise KeyError((i, classifier))

    def table(self) -> str:
        indices = sorted({r["i"] for r in self.rows})
        names = [c for c in CLASSIFIERS if any(r["classifier"] == c for r in self.rows)]
        lines = [f"{self.experiment} / {self.trial}", "i  " + "".join(f"{n.upper():>8}" for n in names)]
        for i in indices:
            cells = []
            for n in names:
                try:
                    cells.append(f"{100 * self.accuracy(i, n):8.1f}")
                except KeyError:
                    cells.append(f"{'-':>8}")
            lines.append(f"{i:<3}" + "".join(cells))
        return "\n".join(lines)


def write_reports(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        writer.writeheader()
        for rep in reports:
            writer.writerows(rep.rows)


def make_classifier(kind: str, grid_size=64, **convnet_params):
    """Encoder + ConvNet pipeline for ``ts``, ``dcr`` or ``tssc``."""
    if kind == "ts":
        return ConvNetClassifier("series", **convnet_params)
    if kind == "dcr":
        encoder = DCREncoder(grid_size)
    elif kind == "tssc":
        encoder = TSSCEncoder(grid_size)
    else:
        raise ConfigError(f"unknown classifier {kind!r}; choose from {CLASSIFIERS}")
    return Pipeline([("encode", encoder), ("convnet", ConvNetClassifier("image", **convnet_params))])


def encode(X: np.ndarray, method: str, grid_size: int = 64, cache_dir=None) -> np.ndarray:
    """Heat-maps of every row, cached on disk under a hash of the series when ``cache_dir`` is set."""
    fn = {"tssc": tssc_heatmap, "dcr": dcr_heatmap}[method]
    out = np.empty((len(X), grid_size, grid_size))
    for k, row in enumerate(X):
        path = None
        if cache_dir is not None:
            digest = hashlib.sha256(np.ascontiguousarray(row, dtype="<f8").tobytes()).hexdigest()
            path = Path(cache_dir) / f"{method}-{grid_size}" / digest[:2] / f"{digest}.npy"
            if path.exists():
                out[k] = np.load(path)
                continue
        out[k] = fn(row, grid_size).cells
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            np.save(path, out[k])
    return out


class ExperimentRunner:
    """Builds datasets and trains models lazily, reusing both across experiments."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self._datasets: dict[int, Dataset] = {}
        self._models: dict[tuple[int, str], ConvNetClassifier] = {}

    def dataset(self, i: int) -> Dataset:
        if i not in self._datasets:
            dcfg = self.cfg.dataset_config(i)
            path = None
            if self.cfg.cache_dir:
                path = Path(self.cfg.cache_dir) / (
                    f"D{i}-m{dcfg.params_per_map}-s{dcfg.slices}-n{dcfg.series_len}-seed{dcfg.master_seed}"
                    + ("" if self.cfg.maps is None else "-" + "+".join(self.cfg.maps)) + ".tssd")
            if path is not None and path.exists():
                ds = read_dataset(path)
            else:
                log.info("building D%d", i)
                ds = build_dataset(dcfg, self.cfg.specs())
                if path is not None:
                    path.parent.mkdir(parents=True, exist_ok=True)
                    write_dataset(ds, path)
            self._datasets[i] = ds
        return self._datasets[i]

    def features(self, i: int, quadrant: str, classifier: str):
        X, y = self.dataset(i).pooled(quadrant)
        if classifier == "ts":
            return X, y
        cache = Path(self.cfg.cache_dir) / "heatmaps" if self.cfg.cache_dir else None
        return encode(X, classifier, self.cfg.grid_size, cache), y

    def model(self, i: int, classifier: str) -> ConvNetClassifier:
        key = (i, classifier)
        if key not in self._models:
            X, y = self.features(i, "base", classifier)
            clf = ConvNetClassifier(
                "series" if classifier == "ts" else "image", epochs=self.cfg.epochs,
                batch_size=self.cfg.batch_size, learning_rate=self.cfg.learning_rate,
                optimizer=self.cfg.optimizer, random_state=self.cfg.seed)
            t0 = time.perf_counter()
            clf.fit(X, y)
            log.info("trained %s on BASE_%d in %.1fs", classifier, i, time.perf_counter() - t0)
            self._models[key] = clf
        return self._models[key]

    def accuracy(self, train_i: int, test_i: int, quadrant: str, classifier: str) -> float:
        X, y = self.features(test_i, quadrant, classifier)
        acc, _ = self.model(train_i, classifier).evaluate(X, y)
        return acc

    def _fill(self, report: ExperimentReport, pairs, quadrant: str) -> ExperimentReport:
        t0 = time.perf_counter()
        report.config = self.cfg.snapshot()
        for row_i, train_i, test_i in pairs:
            for clf in self.cfg.classifiers:
                try:
                    report.add(row_i, clf, self.accuracy(train_i, test_i, quadrant, clf))
                except TSSCError as exc:
                    log.error("%s %s i=%d %s failed: %s", report.experiment, report.trial, row_i, clf, exc)
                    report.failures.append({"i": row_i, "classifier": clf, "error": str(exc)})
        report.wall_clock = time.perf_counter() - t0
        return report

    def run_e1(self) -> ExperimentReport:
        """Train on BASE_i, test on DP_i."""
        pairs = [(i, i, i) for i in self.cfg.indices]
        return self._fill(ExperimentReport("E1_control_params", "DP"), pairs, "dp")

    def run_e2_trial(self, trial: str) -> ExperimentReport:
        """Trial ``"A"`` trains on BASE_0 and tests BASE_1..5; ``"B"`` trains on BASE_5 and tests BASE_0..4."""
        if trial == "A":
            return self._fill(ExperimentReport("E2_initial_conditions", "A_train_BASE0"),
                              [(i, 0, i) for i in (1, 2, 3, 4, 5)], "base")
        if trial == "B":
            return self._fill(ExperimentReport("E2_initial_conditions", "B_train_BASE5"),
                              [(i, 5, i) for i in (0, 1, 2, 3, 4)], "base")
        raise ConfigError(f"unknown trial {trial!r}")

    def run_e2(self) -> tuple[ExperimentReport, ExperimentReport]:
        return self.run_e2_trial("A"), self.run_e2_trial("B")

    def run_e3(self) -> tuple[ExperimentReport, ExperimentReport]:
        """Train on BASE_i, test on the second halves NS-SP_i and NS-DP_i."""
        pairs = [(i, i, i) for i in self.cfg.indices]
        sp = self._fill(ExperimentReport("E3_segmentation", "NS_SP"), pairs, "ns_sp")
        dp = self._fill(ExperimentReport("E3_segmentation", "NS_DP"), pairs, "ns_dp")
        return sp, dp


def run_e1(cfg: ExperimentConfig) -> ExperimentReport:
    return ExperimentRunner(cfg).run_e1()


def run_e2(cfg: ExperimentConfig):
    return ExperimentRunner(cfg).run_e2()


def run_e3(cfg: ExperimentConfig):
    return ExperimentRunner(cfg).run_e3()


def figure_series(name: str, length: int = 4000) -> np.ndarray:
    spec = get_spec(name)
    return normalize(iterate_map(spec, FIGURE_PARAMS[name], spec.base_ic, length).values)


def render_figures(out_dir, length: int = 4000, grid_size: int = 64) -> list[Path]:
    """TSSC and DCR heat-map images for each map at its showcase parameters."""
    out_dir = Path(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name in FIGURE_PARAMS:
        x = figure_series(name, length)
        for tag, hm in (("tssc", tssc_heatmap(x, grid_size)), ("dcr", dcr_heatmap(x, grid_size))):
            path = out_dir / f"{name}_{tag}.pgm"
            export_pgm(hm, path)
            written.append(path)
    return written
