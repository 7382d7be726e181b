"""Command-line entry point: ``iids run|generate|report|predict``."""

from __future__ import annotations

import argparse
import csv
import os
import re
import sys

from . import __version__
from .config import load_config
from .data import Level, ciciot2023_feature_names, load_csv, load_feature_matrix, load_hierarchy, write_csv
from .errors import ConfigError, DataError, ModelFormatError, StageError
from .forest import load_model, save_model
from .pipeline import run_batch
from .report import emit_report, read_result, write_result
from .selection import save_subset
from .synthetic import generate_synthetic

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_STAGE = 4


def _stem(index, result) -> str:
    name = re.sub(r"[^A-Za-z0-9+_-]+", "_", result.name)
    return f"{index:02d}_{result.level.value}_{name}"


def cmd_run(args) -> int:
    overrides = list(args.set or [])
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    config = load_config(args.config, overrides)
    needs_hierarchy = any(Level(level) is not Level.FINE for level in config.levels)
    hierarchy = load_hierarchy(config.hierarchy) if needs_hierarchy or config.hierarchy else None
    class_order = hierarchy.fine_labels if hierarchy is not None else None
    data = load_csv(args.data, config.label_column, class_order)

    results = run_batch(data, config.framework_configs(), hierarchy)

    for sub in ("results", "models", "subsets"):
        os.makedirs(os.path.join(args.out, sub), exist_ok=True)
    for i, result in enumerate(results):
        stem = _stem(i, result)
        write_result(result, os.path.join(args.out, "results", stem + ".result"))
        save_model(result.model, os.path.join(args.out, "models", stem + ".iidsrf"))
        save_subset(result.selected_features, data.feature_names, os.path.join(args.out, "subsets", stem + ".txt"))
    emit_report(results, args.out)
    for result in results:
        gain = "" if result.gain is None else f"  usc gain {result.gain.average_gain:+.4f}"
        print(f"{result.level.value:9s} {result.name:16s} macro F1 {result.metrics.macro_f1:.4f}{gain}")
    return EXIT_OK


def cmd_generate(args) -> int:
    counts = [int(c) for c in args.counts.split(",")]
    names = args.class_names.split(",") if args.class_names else None
    data = generate_synthetic(
        len(counts), counts, args.informative, args.noise, args.separation, args.seed, names
    )
    if args.ciciot_names:
        columns = ciciot2023_feature_names()
        if data.n_features != len(columns):
            raise ConfigError(f"--ciciot-names needs informative + noise = {len(columns)}")
        data = type(data)(data.features, data.labels, columns, data.class_names)
    write_csv(data, args.out, args.label_column)
    return EXIT_OK


def cmd_report(args) -> int:
    records = []
    for path in args.results:
        if not os.path.isfile(path):
            raise DataError(f"no such result file: {path}")
        records.append(read_result(path))
    emit_report(records, args.out)
    return EXIT_OK


def cmd_predict(args) -> int:
    model = load_model(args.model)
    x = load_feature_matrix(args.input, model.feature_names)
    if model.scaler is not None:
        x = model.scaler.transform(x)
    predicted = model.predict(x)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["prediction"])
        writer.writerows([model.class_names[p]] for p in predicted.tolist())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iids", description="Feature-selection and class-balancing IDS experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a batch of frameworks on a labelled CSV")
    run.add_argument("--config", help="key = value config file (defaults when omitted)")
    run.add_argument("--data", required=True, help="labelled CSV")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, help="overrides the config seed")
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    run.set_defaults(func=cmd_run)

    gen = sub.add_parser("generate", help="write a synthetic Gaussian-cluster CSV")
    gen.add_argument("--counts", required=True, help="comma-separated class sizes, e.g. 960,40")
    gen.add_argument("--informative", type=int, default=10)
    gen.add_argument("--noise", type=int, default=20)
    gen.add_argument("--separation", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--class-names", help="comma-separated class names")
    gen.add_argument("--ciciot-names", action="store_true", help="use the 46 CICIoT2023 column names")
    gen.add_argument("--label-column", default="label")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    rep = sub.add_parser("report", help="merge result files into report tables")
    rep.add_argument("results", nargs="+", help="*.result files")
    rep.add_argument("--out", required=True, help="output directory")
    rep.set_defaults(func=cmd_report)

    pred = sub.add_parser("predict", help="label a CSV with a saved model")
    pred.add_argument("--model", required=True)
    pred.add_argument("--input", required=True, help="CSV holding the model's feature columns")
    pred.add_argument("--out", required=True, help="CSV with one 'prediction' column")
    pred.set_defaults(func=cmd_predict)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"iids: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except ConfigError as exc:
        print(f"iids: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ModelFormatError) as exc:
        print(f"iids: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"iids: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
