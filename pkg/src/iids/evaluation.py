"""Confusion matrices, classification metrics and unsaturated-class F1 gains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = [
    "ClassMetrics",
    "ConfusionMatrix",
    "GainReport",
    "MetricsReport",
    "USC_THRESHOLD",
    "compute_metrics",
    "confusion_matrix",
    "f1_gain",
    "identify_usc",
]

USC_THRESHOLD = 0.99


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """``counts[t, p]``: samples of true class t predicted as p."""

    counts: np.ndarray
    class_names: tuple | None = None

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DataError(f"confusion matrix must be square, got shape {counts.shape}")
        if np.any(counts < 0):
            raise DataError("confusion matrix entries must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        names = self.class_names
        if names is None:
            names = tuple(str(i) for i in range(counts.shape[0]))
        if len(names) != counts.shape[0]:
            raise DataError("class_names must match the matrix size")
        object.__setattr__(self, "class_names", tuple(names))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def confusion_matrix(y_true, y_pred, m: int, class_names=None) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.intp)
    y_pred = np.asarray(y_pred, dtype=np.intp)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise DataError(f"label arrays differ in shape: {y_true.shape} vs {y_pred.shape}")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.size and (arr.min() < 0 or arr.max() >= m):
            raise DataError(f"{name} has labels outside [0, {m})")
    counts = np.bincount(y_true * m + y_pred, minlength=m * m).reshape(m, m)
    return ConfusionMatrix(counts, class_names)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    class_names: tuple
    per_class: tuple
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    kappa: float

    def f1_by_class(self) -> dict:
        return {name: m.f1 for name, m in zip(self.class_names, self.per_class)}


def _ratio(num, den):
    return float(num) / float(den) if den else 0.0


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Per-class precision/recall/F1, their macro means, accuracy and Cohen's kappa.

    Undefined ratios (zero denominators) are reported as 0.
    """
    counts = cm.counts
    total = counts.sum()
    if total < 1:
        raise DataError("confusion matrix is empty")
    tp = np.diag(counts)
    predicted = counts.sum(axis=0)
    actual = counts.sum(axis=1)

    per_class = []
    for c in range(counts.shape[0]):
        p = _ratio(tp[c], predicted[c])
        r = _ratio(tp[c], actual[c])
        f1 = 2.0 * p * r / (p + r) if p + r > 0 else 0.0
        per_class.append(ClassMetrics(p, r, f1, int(actual[c])))

    p_o = float(tp.sum()) / float(total)
    p_e = float((actual * predicted).sum()) / float(total) ** 2
    if p_e == 1.0:
        kappa = 1.0 if p_o == 1.0 else 0.0
    else:
        kappa = (p_o - p_e) / (1.0 - p_e)

    return MetricsReport(
        class_names=cm.class_names,
        per_class=tuple(per_class),
        macro_precision=float(np.mean([m.precision for m in per_class])),
        macro_recall=float(np.mean([m.recall for m in per_class])),
        macro_f1=float(np.mean([m.f1 for m in per_class])),
        accuracy=p_o,
        kappa=kappa,
    )


def identify_usc(baseline: MetricsReport, threshold: float = USC_THRESHOLD) -> tuple:
    """Classes whose baseline F1 is strictly below ``threshold``."""
    return tuple(name for name, m in zip(baseline.class_names, baseline.per_class) if m.f1 < threshold)


@dataclass(frozen=True)
class GainReport:
    usc_classes: tuple
    per_class_gain: dict
    average_gain: float


def f1_gain(baseline: MetricsReport, candidate: MetricsReport, usc=None) -> GainReport:
    """F1 change in percentage points over the unsaturated classes.

    ``usc`` defaults to :func:`identify_usc` on the baseline. The average of
    an empty class set is NaN.
    """
    if tuple(baseline.class_names) != tuple(candidate.class_names):
        raise DataError("baseline and candidate reports cover different classes")
    if usc is None:
        usc = identify_usc(baseline)
    usc = tuple(usc)
    base = baseline.f1_by_class()
    cand = candidate.f1_by_class()
    missing = [c for c in usc if c not in base]
    if missing:
        raise DataError(f"unknown classes in USC set: {missing}")
    gains = {c: (cand[c] - base[c]) * 100.0 for c in usc}
    average = float(np.mean(list(gains.values()))) if gains else float("nan")
    return GainReport(usc, gains, average)
