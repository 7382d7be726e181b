"""Dataset container, CSV ingestion, scaling, splitting and label relabeling."""

from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import DataError

__all__ = [
    "Dataset",
    "LabelHierarchy",
    "Level",
    "ScalerParams",
    "SplitSpec",
    "apply_scaler",
    "ciciot2023_feature_names",
    "fit_scaler",
    "load_csv",
    "load_feature_matrix",
    "load_hierarchy",
    "relabel",
    "split",
    "split_indices",
    "write_csv",
]


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """N x k feature matrix with integer class labels.

    ``labels[i]`` indexes into ``class_names``. Arrays are copied and marked
    read-only on construction, so instances can be shared freely.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    class_names: tuple

    def __post_init__(self):
        features = _frozen(self.features, np.float64)
        if features.ndim == 1 and features.size == 0:
            features = features.reshape(0, len(self.feature_names))
            features.setflags(write=False)
        labels = _frozen(self.labels, np.intp)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", tuple(str(n) for n in self.feature_names))
        object.__setattr__(self, "class_names", tuple(str(n) for n in self.class_names))

        if features.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {features.shape}")
        if labels.ndim != 1 or labels.shape[0] != features.shape[0]:
            raise DataError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels"
            )
        if len(self.feature_names) != features.shape[1]:
            raise DataError(
                f"{len(self.feature_names)} feature names for {features.shape[1]} columns"
            )
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DataError("feature names must be distinct")
        if len(set(self.class_names)) != len(self.class_names):
            raise DataError("class names must be distinct")
        if labels.size and (labels.min() < 0 or labels.max() >= len(self.class_names)):
            raise DataError("label out of range of class_names")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.features[rows], self.labels[rows], self.feature_names, self.class_names)

    def select_features(self, columns) -> "Dataset":
        columns = [int(c) for c in columns]
        return Dataset(
            self.features[:, columns],
            self.labels,
            [self.feature_names[c] for c in columns],
            self.class_names,
        )

    def with_features(self, features) -> "Dataset":
        return Dataset(features, self.labels, self.feature_names, self.class_names)

    def equals(self, other: "Dataset") -> bool:
        return (
            self.feature_names == other.feature_names
            and self.class_names == other.class_names
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.features, other.features)
        )


# ---------------------------------------------------------------------------
# CSV ingestion


def _parse_cell(text, line_no, column):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"non-numeric value {text!r} at line {line_no}, column {column!r}") from None
    if not math.isfinite(value):
        raise DataError(f"non-finite value {text!r} at line {line_no}, column {column!r}")
    return value


def _read_table(path):
    """Validated header plus ``(line_no, record)`` pairs of a CSV file."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DataError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path} is empty")
        header = [h.strip() for h in header]
        if any(not h for h in header):
            raise DataError(f"{path}: blank column name in header")
        seen = set()
        for h in header:
            if h in seen:
                raise DataError(f"{path}: duplicate column name {h!r}")
            seen.add(h)
        records = []
        for line_no, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(header):
                raise DataError(
                    f"{path}: line {line_no} has {len(record)} fields, expected {len(header)}"
                )
            records.append((line_no, record))
    return path, header, records


def load_csv(path, label_column: str = "label", class_order=None) -> Dataset:
    """Read a header-first CSV into a :class:`Dataset`.

    Every column except ``label_column`` must hold finite numbers. Class
    indices follow first appearance in the file unless ``class_order`` gives
    a canonical ordering (classes absent from the file are dropped from it).
    Error messages cite the 1-based file line, counting the header as line 1.
    """
    path, header, records = _read_table(path)
    if label_column not in header:
        raise DataError(f"{path}: label column {label_column!r} not in header")
    label_pos = header.index(label_column)
    feature_names = [h for i, h in enumerate(header) if i != label_pos]

    rows = []
    raw_labels = []
    for line_no, record in records:
        raw_labels.append(record[label_pos].strip())
        rows.append(
            [_parse_cell(cell, line_no, header[i]) for i, cell in enumerate(record) if i != label_pos]
        )

    if not rows:
        raise DataError(f"{path} has a header but no data rows")

    if class_order is None:
        class_names = list(dict.fromkeys(raw_labels))
    else:
        present = set(raw_labels)
        unknown = present.difference(class_order)
        if unknown:
            raise DataError(f"labels not in class order: {sorted(unknown)}")
        class_names = [c for c in class_order if c in present]
    index = {name: i for i, name in enumerate(class_names)}
    labels = np.fromiter((index[v] for v in raw_labels), dtype=np.intp, count=len(raw_labels))
    features = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(feature_names))
    return Dataset(features, labels, feature_names, class_names)


def load_feature_matrix(path, columns) -> np.ndarray:
    """The named numeric ``columns`` of a CSV, in the given order.

    Other columns (a label column, for instance) are ignored.
    """
    path, header, records = _read_table(path)
    missing = [c for c in columns if c not in header]
    if missing:
        raise DataError(f"{path}: missing feature columns {missing}")
    if not records:
        raise DataError(f"{path} has a header but no data rows")
    positions = [header.index(c) for c in columns]
    rows = [[_parse_cell(record[p], line_no, header[p]) for p in positions] for line_no, record in records]
    return np.asarray(rows, dtype=np.float64).reshape(len(rows), len(positions))


def write_csv(data: Dataset, path, label_column: str = "label") -> None:
    """Write ``data`` so that :func:`load_csv` restores it exactly.

    Floats use ``repr`` (shortest round-trip form); the label column goes last.
    """
    if label_column in data.feature_names:
        raise DataError(f"label column {label_column!r} clashes with a feature name")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([*data.feature_names, label_column])
        names = data.class_names
        for row, label in zip(data.features.tolist(), data.labels.tolist()):
            writer.writerow([*map(repr, row), names[label]])


def ciciot2023_feature_names() -> list:
    """The 46 flow-feature column names of the CICIoT2023 CSV release."""
    text = resources.files("iids.resources").joinpath("ciciot2023_columns.txt").read_text()
    return [line.strip() for line in text.splitlines() if line.strip()]


# ---------------------------------------------------------------------------
# Scaling


@dataclass(frozen=True, eq=False)
class ScalerParams:
    means: np.ndarray
    stddevs: np.ndarray

    def __post_init__(self):
        means = _frozen(self.means, np.float64)
        stddevs = _frozen(self.stddevs, np.float64)
        if means.shape != stddevs.shape or means.ndim != 1:
            raise DataError("scaler means and stddevs must be 1-D of equal length")
        if np.any(stddevs < 0):
            raise DataError("scaler stddevs must be non-negative")
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stddevs", stddevs)

    @property
    def k(self) -> int:
        return self.means.shape[0]

    def subset(self, columns) -> "ScalerParams":
        columns = list(columns)
        return ScalerParams(self.means[columns], self.stddevs[columns])

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.k:
            raise DataError(f"scaler fitted on {self.k} features, got shape {features.shape}")
        scale = np.where(self.stddevs > 0, self.stddevs, 1.0)
        out = (features - self.means) / scale
        out[:, self.stddevs == 0] = 0.0
        return out


def fit_scaler(train: Dataset) -> ScalerParams:
    """Column means and population (ddof=0) standard deviations."""
    if train.n_samples == 0:
        raise DataError("cannot fit a scaler on an empty dataset")
    return ScalerParams(train.features.mean(axis=0), train.features.std(axis=0))


def apply_scaler(data: Dataset, params: ScalerParams) -> Dataset:
    """Standardize each column; zero-variance columns become all zeros."""
    if params.k != data.n_features:
        raise DataError(f"scaler fitted on {params.k} features, dataset has {data.n_features}")
    return data.with_features(params.transform(data.features))


# ---------------------------------------------------------------------------
# Splitting


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise DataError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _n_train(count, fraction):
    return int(math.floor(count * fraction + 0.5))


def split_indices(labels, n_classes: int, spec: SplitSpec):
    """Row indices ``(train, test)``, each sorted ascending.

    Depends only on the labels and the seed, never on feature values.
    """
    labels = np.asarray(labels, dtype=np.intp)
    rng = np.random.default_rng(spec.seed)
    if spec.stratified:
        counts = np.bincount(labels, minlength=n_classes)
        empty = np.flatnonzero(counts == 0)
        if empty.size:
            raise DataError(f"stratified split: classes {empty.tolist()} have no samples")
        train = []
        for c in range(n_classes):
            rows = np.flatnonzero(labels == c)
            rows = rows[rng.permutation(rows.size)]
            train.append(rows[: _n_train(rows.size, spec.train_fraction)])
        train = np.concatenate(train)
    else:
        perm = rng.permutation(labels.size)
        train = perm[: _n_train(labels.size, spec.train_fraction)]
    mask = np.zeros(labels.size, dtype=bool)
    mask[train] = True
    return np.flatnonzero(mask), np.flatnonzero(~mask)


def split(data: Dataset, spec: SplitSpec):
    train, test = split_indices(data.labels, data.n_classes, spec)
    return data.take(train), data.take(test)


# ---------------------------------------------------------------------------
# Label hierarchy


class Level(str, enum.Enum):
    FINE = "fine34"
    CATEGORY = "category8"
    BINARY = "binary2"


BENIGN = "benign"
ATTACK = "attack"


@dataclass(frozen=True)
class LabelHierarchy:
    """Fine label -> category -> {benign, attack}.

    ``fine_to_category`` preserves the file's line order, which is the
    canonical ordering used for categories at the category level.
    """

    fine_to_category: dict
    benign_category: str
    category_to_binary: dict = field(default=None)

    def __post_init__(self):
        categories = list(dict.fromkeys(self.fine_to_category.values()))
        if self.benign_category not in categories:
            raise DataError(f"benign category {self.benign_category!r} has no fine labels")
        binary = {c: BENIGN if c == self.benign_category else ATTACK for c in categories}
        if self.category_to_binary is not None and dict(self.category_to_binary) != binary:
            raise DataError("category_to_binary must map exactly the benign category to benign")
        object.__setattr__(self, "category_to_binary", binary)

    @property
    def fine_labels(self) -> list:
        return list(self.fine_to_category)

    @property
    def categories(self) -> list:
        return list(self.category_to_binary)


def load_hierarchy(path=None) -> LabelHierarchy:
    """Parse a hierarchy file; ``None`` loads the shipped CICIoT2023 table."""
    if path is None:
        text = resources.files("iids.resources").joinpath("ciciot2023_hierarchy.txt").read_text()
        source = "<ciciot2023_hierarchy.txt>"
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        source = os.fspath(path)

    mapping = {}
    benign = None
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower().startswith("benign:"):
            if benign is not None:
                raise DataError(f"{source}:{line_no}: repeated benign directive")
            benign = line.split(":", 1)[1].strip()
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2 or not all(parts):
            raise DataError(f"{source}:{line_no}: expected 'fine_label,category'")
        fine, category = parts
        if fine in mapping:
            raise DataError(f"{source}:{line_no}: fine label {fine!r} mapped twice")
        mapping[fine] = category
    if benign is None:
        raise DataError(f"{source}: missing 'benign: <category>' directive")
    return LabelHierarchy(mapping, benign)


def relabel(data: Dataset, hierarchy: LabelHierarchy | None, level) -> Dataset:
    """Coarsen labels to the requested level; ``fine34`` is the identity.

    Output classes keep the hierarchy's canonical order, restricted to the
    classes that occur in ``data``.
    """
    level = Level(level)
    if level is Level.FINE:
        return data
    if hierarchy is None:
        raise DataError(f"relabeling to {level.value} needs a label hierarchy")

    unmapped = [n for n in data.class_names if n not in hierarchy.fine_to_category]
    if unmapped:
        raise DataError(f"fine labels missing from hierarchy: {unmapped}")
    to_category = [hierarchy.fine_to_category[n] for n in data.class_names]
    if level is Level.CATEGORY:
        targets, order = to_category, hierarchy.categories
    else:
        targets = [hierarchy.category_to_binary[c] for c in to_category]
        order = [BENIGN, ATTACK]

    present = set(np.asarray(targets, dtype=object)[np.unique(data.labels)]) if data.n_samples else set()
    new_names = [name for name in order if name in present]
    index = {name: i for i, name in enumerate(new_names)}
    lookup = np.array([index.get(t, -1) for t in targets], dtype=np.intp)
    return Dataset(data.features, lookup[data.labels], data.feature_names, new_names)
