"""CART trees with Gini splits and the random-forest ensemble."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..balancing import balanced_bootstrap
from ..data import Dataset, ScalerParams
from ..errors import ConfigError, DataError
from . import kernels

BOOTSTRAP_MODES = ("standard", "balanced", "none")


@dataclass(frozen=True)
class ForestConfig:
    """Random-forest hyperparameters.

    ``features_per_split`` is ``"sqrt"``, ``"all"`` or an explicit count.
    ``bootstrap_mode`` is ``"standard"`` (N draws with replacement),
    ``"balanced"`` (``per_class_count`` draws per class, minority count when
    unset) or ``"none"`` (every tree sees the full training set).
    """

    num_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    features_per_split: object = "sqrt"
    bootstrap_mode: str = "standard"
    per_class_count: int | None = None
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.num_trees < 1:
            raise ConfigError("num_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 1:
            raise ConfigError("max_depth must be >= 1 or None")
        if self.min_samples_leaf < 1:
            raise ConfigError("min_samples_leaf must be >= 1")
        if self.bootstrap_mode not in BOOTSTRAP_MODES:
            raise ConfigError(f"bootstrap_mode must be one of {BOOTSTRAP_MODES}")
        if self.per_class_count is not None and self.per_class_count < 1:
            raise ConfigError("per_class_count must be >= 1")
        fps = self.features_per_split
        if isinstance(fps, str):
            if fps not in ("sqrt", "all"):
                try:
                    fps = int(fps)
                except ValueError:
                    raise ConfigError(f"bad features_per_split {fps!r}") from None
                object.__setattr__(self, "features_per_split", fps)
        if isinstance(self.features_per_split, (int, np.integer)):
            if self.features_per_split < 1:
                raise ConfigError("features_per_split must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def split_width(self, k: int) -> int:
        fps = self.features_per_split
        if fps == "sqrt":
            return max(1, int(math.isqrt(k)))
        if fps == "all":
            return k
        if fps > k:
            raise ConfigError(f"features_per_split={fps} exceeds {k} features")
        return int(fps)

    def with_(self, **changes) -> "ForestConfig":
        return replace(self, **changes)


def gini_impurity(class_counts) -> float:
    counts = np.asarray(class_counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        raise DataError("gini impurity of an empty node")
    p = counts / total
    return float(1.0 - np.dot(p, p))


@dataclass(eq=False)
class Tree:
    """Flat-array CART tree; node 0 is the root, nodes in preorder.

    ``feature[i] == -1`` marks a leaf. Rows with ``x[feature] <= threshold``
    go to ``left``. ``counts`` holds per-node training class counts and
    ``gain`` the Gini decrease of each internal split.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray
    gain: np.ndarray = field(default=None)

    def __post_init__(self):
        self.feature = np.ascontiguousarray(self.feature, dtype=np.int32)
        self.threshold = np.ascontiguousarray(self.threshold, dtype=np.float64)
        self.left = np.ascontiguousarray(self.left, dtype=np.int32)
        self.right = np.ascontiguousarray(self.right, dtype=np.int32)
        self.counts = np.ascontiguousarray(self.counts, dtype=np.int64)
        if self.gain is None:
            self.gain = np.zeros(self.feature.shape[0])
        self.leaf_class = np.argmax(self.counts, axis=1).astype(np.intp)

    @property
    def node_count(self) -> int:
        return self.feature.shape[0]

    def apply(self, x) -> np.ndarray:
        return kernels.apply_tree(self.feature, self.threshold, self.left, self.right, x)

    def predict(self, x) -> np.ndarray:
        return self.leaf_class[self.apply(x)]


def grow_tree(xt, y, rows, n_classes, config: ForestConfig, rng) -> Tree:
    """Grow one tree on ``rows`` (may repeat) of the feature-major matrix ``xt``."""
    k = xt.shape[0]
    width = config.split_width(k)
    all_features = np.arange(k, dtype=np.intp)
    min_leaf = config.min_samples_leaf
    max_depth = config.max_depth

    feature, threshold, left, right, counts, gains = [], [], [], [], [], []
    # (rows, depth, parent, is_left); right pushed first so preorder is left-first.
    stack = [(np.asarray(rows, dtype=np.intp), 0, -1, False)]
    while stack:
        node_rows, depth, parent, is_left = stack.pop()
        node = len(feature)
        if parent >= 0:
            (left if is_left else right)[parent] = node
        node_counts = np.bincount(y[node_rows], minlength=n_classes)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(node_counts)
        gains.append(0.0)

        if np.count_nonzero(node_counts) <= 1:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if node_rows.size < 2 * min_leaf:
            continue
        if width < k:
            candidates = np.sort(rng.choice(k, width, replace=False)).astype(np.intp)
        else:
            candidates = all_features
        f, t, gain = kernels.best_split(xt, y, node_rows, candidates, n_classes, min_leaf)
        if f < 0:
            continue
        feature[node] = f
        threshold[node] = t
        gains[node] = gain
        go_left = xt[f, node_rows] <= t
        stack.append((node_rows[~go_left], depth + 1, node, False))
        stack.append((node_rows[go_left], depth + 1, node, True))

    return Tree(
        np.array(feature),
        np.array(threshold),
        np.array(left),
        np.array(right),
        np.array(counts).reshape(len(feature), n_classes),
        np.array(gains),
    )


def tree_importances(tree: Tree, n_features: int) -> np.ndarray:
    """Per-feature sum of node-size-weighted Gini decrease, relative to the root size."""
    internal = tree.feature >= 0
    sizes = tree.counts.sum(axis=1)
    weighted = tree.gain[internal] * sizes[internal] / sizes[0]
    return np.bincount(tree.feature[internal], weights=weighted, minlength=n_features)


@dataclass(eq=False)
class ForestModel:
    trees: list
    config: ForestConfig
    class_names: tuple
    feature_names: tuple
    importances: np.ndarray
    # Preprocessing for raw inputs; None when callers pass scaled features.
    scaler: ScalerParams | None = None

    def __post_init__(self):
        self.class_names = tuple(self.class_names)
        self.feature_names = tuple(self.feature_names)
        self.importances = np.asarray(self.importances, dtype=np.float64)
        if len(self.trees) != self.config.num_trees:
            raise ConfigError(f"{len(self.trees)} trees but config.num_trees={self.config.num_trees}")
        if self.importances.shape != (len(self.feature_names),):
            raise ConfigError("importances must have one entry per feature")

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def votes(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.n_features:
            raise DataError(f"model expects {self.n_features} features, got shape {x.shape}")
        n = x.shape[0]
        out = np.zeros(n * self.n_classes, dtype=np.int64)
        offsets = np.arange(n, dtype=np.intp) * self.n_classes
        for tree in self.trees:
            np.add.at(out, offsets + tree.predict(x), 1)
        return out.reshape(n, self.n_classes)

    def predict(self, x) -> np.ndarray:
        """Plurality vote; ties go to the lower class index."""
        return np.argmax(self.votes(x), axis=1)


def _bootstrap_rows(labels, n_classes, config, rng):
    n = labels.shape[0]
    if config.bootstrap_mode == "standard":
        return rng.integers(0, n, n)
    if config.bootstrap_mode == "balanced":
        per_class = config.per_class_count
        if per_class is None:
            per_class = int(np.bincount(labels, minlength=n_classes).min())
        return balanced_bootstrap(labels, per_class, rng, n_classes=n_classes)
    return np.arange(n, dtype=np.intp)


def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Independent per-tree stream; trees can be grown in any order."""
    return np.random.default_rng([seed, tree_index])


def train_forest(train: Dataset, config: ForestConfig = ForestConfig(), scaler=None) -> ForestModel:
    """Fit ``config.num_trees`` trees, each on its own bootstrap of ``train``."""
    if train.n_samples < 1:
        raise DataError("cannot train on an empty dataset")
    counts = train.class_counts()
    if np.count_nonzero(counts) < 2:
        raise DataError("training data must contain at least two classes")
    if config.bootstrap_mode == "balanced" and np.any(counts == 0):
        raise DataError("balanced bootstrap needs every class present in training data")

    k = train.n_features
    config.split_width(k)
    xt = np.ascontiguousarray(train.features.T)
    y = np.ascontiguousarray(train.labels, dtype=np.intp)
    m = train.n_classes

    def build(t):
        rng = tree_rng(config.seed, t)
        rows = _bootstrap_rows(y, m, config, rng)
        return grow_tree(xt, y, rows, m, config, rng)

    if config.n_jobs != 1 and config.num_trees > 1:
        workers = None if config.n_jobs < 1 else config.n_jobs
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(build, range(config.num_trees)))
    else:
        trees = [build(t) for t in range(config.num_trees)]

    total = np.zeros(k)
    for tree in trees:
        total += tree_importances(tree, k)
    mass = total.sum()
    importances = total / mass if mass > 0 else total
    return ForestModel(trees, config, train.class_names, train.feature_names, importances, scaler)


def predict(model: ForestModel, features) -> np.ndarray:
    return model.predict(features)
