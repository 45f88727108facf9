"""Command line entry point: ``tssc <subcommand> ...``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .convnet import ConvNetClassifier, load_model, save_model
from .dataset import QUADRANTS, DatasetConfig, build_dataset, read_dataset, write_dataset
from .exceptions import TSSCError
from .experiments import (CLASSIFIERS, ExperimentConfig, ExperimentRunner, encode, render_figures,
                          write_reports)

log = logging.getLogger("tssc")


def _dataset_index(text: str) -> int:
    text = text.upper().lstrip("D")
    if text not in {str(i) for i in range(6)}:
        raise argparse.ArgumentTypeError("dataset must be one of D0..D5")
    return int(text)


def cmd_generate(args):
    cfg = DatasetConfig.for_index(args.dataset, args.params_per_map, args.slices,
                                  args.series_len, args.seed)
    ds = build_dataset(cfg, n_jobs=args.jobs)
    write_dataset(ds, args.out)
    n = sum(len(qs[q]) for qs in ds.slices for q in QUADRANTS)
    print(f"wrote {n} segments ({len(ds.slices)} slices, IC width {cfg.ic_width}) to {args.out}")


def cmd_encode(args):
    ds = read_dataset(args.input)
    arrays = {}
    for q in QUADRANTS:
        X, y = ds.pooled(q)
        arrays[f"{q}_X"] = encode(X, args.method, args.grid)
        arrays[f"{q}_y"] = y
    np.savez_compressed(args.out, method=args.method, grid=args.grid, **arrays)
    print(f"wrote {args.method} heat-maps ({args.grid}x{args.grid}) to {args.out}")


def _features(ds, quadrant, classifier, grid):
    X, y = ds.pooled(quadrant)
    if classifier != "ts":
        X = encode(X, classifier, grid)
    return X, y


def cmd_train(args):
    ds = read_dataset(args.input)
    X, y = _features(ds, args.train_quadrant, args.classifier, args.grid)
    clf = ConvNetClassifier("series" if args.classifier == "ts" else "image", epochs=args.epochs,
                            batch_size=args.batch_size, learning_rate=args.learning_rate,
                            optimizer=args.optimizer, random_state=args.seed,
                            validation_fraction=args.validation_fraction,
                            verbose=args.verbose)
    clf.fit(X, y)
    save_model(clf.model_, args.out, {"classifier": args.classifier, "grid": args.grid,
                                         "classes": clf.classes_.tolist()})
    if args.metrics:
        clf.write_history(args.metrics)
    last = clf.history_[-1] if clf.history_ else {}
    print(f"trained {args.classifier} on {args.train_quadrant} ({len(y)} series); "
          f"final train accuracy {last.get('accuracy', float('nan')):.4f}; saved {args.out}")


def cmd_eval(args):
    model, meta = load_model(args.model)
    classifier = meta.get("classifier", "tssc")
    ds = read_dataset(args.input)
    X, y = _features(ds, args.test_quadrant, classifier, meta.get("grid", 64))
    acc, cm = ConvNetClassifier.from_model(model, meta.get("classes")).evaluate(X, y)
    print(f"{classifier} accuracy on {args.test_quadrant}: {acc:.4f}")
    print("confusion matrix (rows = true map, columns = predicted):")
    print(np.array2string(cm, max_line_width=200))


def cmd_experiment(args):
    cfg = ExperimentConfig.for_scale(
        args.scale, epochs=args.epochs, params_per_map=args.params_per_map, slices=args.slices,
        seed=args.seed, cache_dir=args.cache_dir,
        indices=tuple(args.indices) if args.indices else None,
        classifiers=tuple(args.classifiers) if args.classifiers else None,
        maps=tuple(args.maps) if args.maps else None)
    runner = ExperimentRunner(cfg)
    run = {"e1": lambda: [runner.run_e1()], "e2": runner.run_e2, "e3": runner.run_e3}[args.id]
    reports = list(run())
    for rep in reports:
        print(rep.table())
        for f in rep.failures:
            print(f"  FAILED i={f['i']} {f['classifier']}: {f['error']}")
        print(f"  ({rep.wall_clock:.0f}s)")
    if args.out:
        write_reports(reports, args.out)
        print(f"wrote {args.out}")


def cmd_render(args):
    paths = render_figures(args.out, args.length, args.grid)
    print(f"wrote {len(paths)} images to {args.out}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tssc", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a benchmark dataset D0..D5")
    g.add_argument("--dataset", type=_dataset_index, required=True)
    g.add_argument("--params-per-map", type=int, default=64)
    g.add_argument("--slices", type=int, default=2, help="slices for D1..D5 (D0 always has one)")
    g.add_argument("--series-len", type=int, default=2000)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--jobs", type=int, default=1)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    e = sub.add_parser("encode", help="turn a dataset into TSSC or DCR heat-maps (.npz)")
    e.add_argument("--method", choices=["tssc", "dcr"], default="tssc")
    e.add_argument("--grid", type=int, default=64)
    e.add_argument("--in", dest="input", required=True)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_encode)

    t = sub.add_parser("train", help="train one classifier on a dataset quadrant")
    t.add_argument("--classifier", choices=CLASSIFIERS, default="tssc")
    t.add_argument("--in", dest="input", required=True)
    t.add_argument("--train-quadrant", choices=QUADRANTS, default="base")
    t.add_argument("--epochs", type=int, default=15)
    t.add_argument("--batch-size", type=int, default=64)
    t.add_argument("--learning-rate", type=float, default=1e-3)
    t.add_argument("--optimizer", choices=["adam", "sgd_momentum"], default="adam")
    t.add_argument("--validation-fraction", type=float, default=0.0)
    t.add_argument("--grid", type=int, default=64)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True, help="checkpoint path (.tssm)")
    t.add_argument("--metrics", help="per-epoch metrics CSV")
    t.set_defaults(func=cmd_train)

    v = sub.add_parser("eval", help="evaluate a checkpoint on a dataset quadrant")
    v.add_argument("--model", required=True)
    v.add_argument("--in", dest="input", required=True)
    v.add_argument("--test-quadrant", choices=QUADRANTS, default="dp")
    v.set_defaults(func=cmd_eval)

    x = sub.add_parser("experiment", help="run experiment e1, e2 or e3")
    x.add_argument("--id", choices=["e1", "e2", "e3"], required=True)
    x.add_argument("--scale", choices=["desk", "paper"], default="desk")
    x.add_argument("--epochs", type=int)
    x.add_argument("--params-per-map", type=int)
    x.add_argument("--slices", type=int)
    x.add_argument("--seed", type=int)
    x.add_argument("--indices", type=int, nargs="+")
    x.add_argument("--classifiers", choices=CLASSIFIERS, nargs="+")
    x.add_argument("--maps", nargs="+", help="restrict to these maps (default: all nine)")
    x.add_argument("--cache-dir")
    x.add_argument("--out", help="report CSV")
    x.set_defaults(func=cmd_experiment)

    r = sub.add_parser("render-figures", help="TSSC and DCR images of the nine maps")
    r.add_argument("--out", default="figures")
    r.add_argument("--length", type=int, default=4000)
    r.add_argument("--grid", type=int, default=64)
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (TSSCError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
