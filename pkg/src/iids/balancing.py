"""Training-set rebalancing: random oversampling and balanced bootstraps."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigError, DataError

__all__ = ["BalanceMethod", "BalanceSpec", "balanced_bootstrap", "random_oversample"]


class BalanceMethod(str, enum.Enum):
    NONE = "NONE"
    ROS = "ROS"
    BRFC = "BRFC"


@dataclass(frozen=True)
class BalanceSpec:
    method: BalanceMethod = BalanceMethod.NONE
    seed: int = 0
    # Per-class draw count N_L for BRFC; None means the minority training count.
    per_class_count: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "method", BalanceMethod(self.method))
        if self.per_class_count is not None and self.per_class_count < 1:
            raise ConfigError(f"per_class_count must be >= 1, got {self.per_class_count}")


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _class_rows(labels, n_classes):
    labels = np.asarray(labels, dtype=np.intp)
    counts = np.bincount(labels, minlength=n_classes)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise DataError(f"classes {empty.tolist()} have no training samples")
    order = np.argsort(labels, kind="stable")
    return np.split(order, np.cumsum(counts)[:-1])


def random_oversample(train: Dataset, seed=0) -> Dataset:
    """Duplicate random same-class rows until every class has the majority count.

    Original rows come first, in their original order, followed by the
    duplicates grouped by class.
    """
    groups = _class_rows(train.labels, train.n_classes)
    target = max(g.size for g in groups)
    rng = _rng(seed)
    extra = [g[rng.integers(0, g.size, target - g.size)] for g in groups]
    rows = np.concatenate([np.arange(train.n_samples), *extra])
    return train.take(rows)


def balanced_bootstrap(labels, per_class_count: int, seed=0, n_classes: int | None = None) -> np.ndarray:
    """Indices drawing ``per_class_count`` rows with replacement from each class.

    ``labels`` may be a label array or a :class:`Dataset`. The result is
    grouped by class in class-index order. ``seed`` may be an int or a
    ``numpy.random.Generator``.
    """
    if isinstance(labels, Dataset):
        n_classes = labels.n_classes if n_classes is None else n_classes
        labels = labels.labels
    labels = np.asarray(labels, dtype=np.intp)
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 0
    if per_class_count < 1:
        raise ConfigError(f"per_class_count must be >= 1, got {per_class_count}")
    groups = _class_rows(labels, n_classes)
    rng = _rng(seed)
    return np.concatenate([g[rng.integers(0, g.size, per_class_count)] for g in groups])
