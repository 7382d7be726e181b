"""Result files and report tables.

A result file is flat ``key = value`` text, one run per file. Lists are
JSON-encoded and floats use ``repr`` so values round-trip exactly. Timings
are deliberately left out: the same data, config and seed must produce the
same bytes.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

from .errors import DataError

__all__ = ["ResultRecord", "emit_report", "read_result", "result_record", "write_result"]

AVERAGING = "macro"


@dataclass(frozen=True)
class ResultRecord:
    """The reportable part of one framework run."""

    name: str
    family: str
    level: str
    class_names: tuple
    features: tuple
    precision: float
    recall: float
    f1: float
    accuracy: float
    kappa: float
    class_precision: tuple
    class_recall: tuple
    class_f1: tuple
    class_support: tuple
    usc: tuple = ()
    gains: tuple = ()
    average_gain: float | None = None

    @property
    def n_classes(self) -> int:
        return len(self.class_names)


def result_record(result) -> ResultRecord:
    """Flatten an :class:`~iids.pipeline.ExperimentResult`."""
    m = result.metrics
    gain = result.gain
    return ResultRecord(
        name=result.name,
        family=result.framework.family,
        level=result.level.value,
        class_names=tuple(m.class_names),
        features=tuple(result.feature_names),
        precision=m.macro_precision,
        recall=m.macro_recall,
        f1=m.macro_f1,
        accuracy=m.accuracy,
        kappa=m.kappa,
        class_precision=tuple(c.precision for c in m.per_class),
        class_recall=tuple(c.recall for c in m.per_class),
        class_f1=tuple(c.f1 for c in m.per_class),
        class_support=tuple(c.support for c in m.per_class),
        usc=tuple(gain.usc_classes) if gain else (),
        gains=tuple(gain.per_class_gain[c] for c in gain.usc_classes) if gain else (),
        average_gain=gain.average_gain if gain else None,
    )


def _as_record(item) -> ResultRecord:
    return item if isinstance(item, ResultRecord) else result_record(item)


_SCALARS = ("precision", "recall", "f1", "accuracy", "kappa")
_LISTS = ("class_names", "features", "class_precision", "class_recall", "class_f1", "class_support", "usc", "gains")


def _encode(value):
    return json.dumps(list(value), allow_nan=True) if isinstance(value, tuple) else repr(value)


def write_result(result, path) -> None:
    rec = _as_record(result)
    lines = [
        "# iids result v1",
        f"name = {rec.name}",
        f"family = {rec.family}",
        f"level = {rec.level}",
        f"averaging = {AVERAGING}",
    ]
    lines += [f"{key} = {getattr(rec, key)!r}" for key in _SCALARS]
    lines += [f"{key} = {_encode(getattr(rec, key))}" for key in _LISTS]
    avg = rec.average_gain
    lines.append(f"average_gain = {'none' if avg is None else repr(avg)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_result(path) -> ResultRecord:
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise DataError(f"{path}:{line_no}: expected 'key = value'")
            values[key.strip()] = value.strip()
    try:
        if values.get("averaging", AVERAGING) != AVERAGING:
            raise DataError(f"{path}: unsupported averaging {values['averaging']!r}")
        fields = {k: values[k] for k in ("name", "family", "level")}
        fields.update({k: float(values[k]) for k in _SCALARS})
        for key in _LISTS:
            fields[key] = tuple(json.loads(values[key]))
        avg = values["average_gain"]
        fields["average_gain"] = None if avg == "none" else float(avg)
    except KeyError as exc:
        raise DataError(f"{path}: missing key {exc.args[0]!r}") from None
    except ValueError as exc:
        if isinstance(exc, DataError):
            raise
        raise DataError(f"{path}: {exc}") from None
    return ResultRecord(**fields)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.4f}"


def emit_report(results, out_dir) -> dict:
    """Write ``table.csv``, ``per_class_f1.csv`` and ``gain_summary.txt``.

    ``table.csv`` has one row per run (framework, class count and macro
    metrics). ``per_class_f1.csv`` has one row per (level, class) with a
    column per framework. ``gain_summary.txt`` lists the average USC gain
    per framework in percentage points. Returns the written paths.
    """
    records = [_as_record(r) for r in results]
    if not records:
        raise DataError("no results to report")
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "table": os.path.join(out_dir, "table.csv"),
        "per_class": os.path.join(out_dir, "per_class_f1.csv"),
        "gains": os.path.join(out_dir, "gain_summary.txt"),
    }

    names = list(dict.fromkeys(r.name for r in records))
    levels = list(dict.fromkeys(r.level for r in records))
    # Grouped by framework, one row per class level within each group.
    grouped = sorted(records, key=lambda r: names.index(r.name))
    with open(paths["table"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["framework", "classes", "precision", "recall", "f1", "accuracy", "kappa"])
        for r in grouped:
            w.writerow([r.name, r.n_classes, *(_fmt(getattr(r, k)) for k in _SCALARS)])

    with open(paths["per_class"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["level", "class", *names])
        for level in levels:
            at_level = {r.name: r for r in records if r.level == level}
            classes = next(iter(at_level.values())).class_names
            for i, cls in enumerate(classes):
                row = [_fmt(at_level[n].class_f1[i]) if n in at_level else "" for n in names]
                w.writerow([level, cls, *row])

    lines = ["# average F1 gain over FW1 on unsaturated classes (percentage points)"]
    for level in levels:
        at_level = [r for r in records if r.level == level]
        usc = next((r.usc for r in at_level if r.average_gain is not None), ())
        lines.append(f"[{level}] usc = {', '.join(usc) if usc else '(none)'}")
        for r in at_level:
            gain = "n/a" if r.average_gain is None else _fmt(r.average_gain)
            lines.append(f"{r.name}\t{gain}")
    with open(paths["gains"], "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return paths
