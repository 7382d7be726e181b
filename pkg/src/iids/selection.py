"""Feature selection: CFS best-first search, mRMR ranking, RF-RFE and their intersection (IRM)."""

from __future__ import annotations

import enum
import heapq
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigError, DataError, EmptySelectionWarning
from .forest import ForestConfig, train_forest

__all__ = [
    "AssociationMatrix",
    "FeatureSubset",
    "SelectionMethod",
    "build_association_matrix",
    "cfs_merit",
    "cfs_select",
    "discretize",
    "entropy",
    "irm_select",
    "load_subset",
    "mrmr_rank",
    "mutual_information",
    "rfe_rank",
    "save_subset",
    "symmetrical_uncertainty",
]


class SelectionMethod(str, enum.Enum):
    ALL = "ALL"
    CFS = "CFS"
    MRMR = "MRMR"
    RFE = "RFE"
    IRM = "IRM"


@dataclass(frozen=True)
class FeatureSubset:
    indices: tuple
    method: SelectionMethod
    scores: tuple | None = None

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if len(set(indices)) != len(indices) or any(i < 0 for i in indices):
            raise ConfigError(f"feature indices must be distinct and non-negative: {indices}")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "method", SelectionMethod(self.method))
        if self.scores is not None:
            scores = tuple(float(s) for s in self.scores)
            if len(scores) != len(indices):
                raise ConfigError("scores must align with indices")
            object.__setattr__(self, "scores", scores)

    def __len__(self):
        return len(self.indices)

    @classmethod
    def all_features(cls, k: int) -> "FeatureSubset":
        return cls(tuple(range(k)), SelectionMethod.ALL)

    def names(self, feature_names) -> list:
        return [feature_names[i] for i in self.indices]


def save_subset(subset: FeatureSubset, feature_names, path) -> None:
    """Write ``method: TAG`` then one ``name<TAB>score`` line per feature ("-" when unscored)."""
    lines = ["# iids feature subset v1", f"method: {subset.method.value}"]
    scores = subset.scores or (None,) * len(subset)
    for i, s in zip(subset.indices, scores):
        lines.append(f"{feature_names[i]}\t{'-' if s is None else repr(s)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_subset(path, feature_names) -> FeatureSubset:
    index = {name: i for i, name in enumerate(feature_names)}
    method, indices, scores = None, [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if method is None and line.startswith("method:"):
                method = line.split(":", 1)[1].strip()
                continue
            name, _, score = line.partition("\t")
            if name not in index:
                raise DataError(f"{path}: unknown feature {name!r}")
            indices.append(index[name])
            scores.append(None if score.strip() in ("", "-") else float(score))
    if method is None:
        raise DataError(f"{path}: missing 'method:' line")
    has_scores = all(s is not None for s in scores)
    return FeatureSubset(indices, method, tuple(scores) if has_scores and scores else None)


# ---------------------------------------------------------------------------
# Information measures


def discretize(column, num_bins: int) -> np.ndarray:
    """Equal-frequency binning into ``[0, num_bins)``.

    Cut points are the order statistics at the bin boundaries; a value equal
    to a cut point falls in the lower bin, so constant columns land in bin 0.
    """
    if num_bins < 1:
        raise ConfigError("num_bins must be >= 1")
    column = np.asarray(column, dtype=np.float64)
    n = column.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.intp)
    ordered = np.sort(column)
    positions = [math.ceil(n * b / num_bins) - 1 for b in range(1, num_bins)]
    cuts = ordered[positions] if positions else ordered[:0]
    return np.searchsorted(cuts, column, side="left").astype(np.intp)


def _codes(x):
    _, inverse = np.unique(np.asarray(x), return_inverse=True)
    return inverse.reshape(-1).astype(np.intp), int(inverse.max()) + 1 if inverse.size else 0


def _entropy_from_counts(counts) -> float:
    # Sorted so the sum does not depend on cell order (keeps SU symmetric).
    counts = np.sort(counts[counts > 0]).astype(np.float64)
    total = counts.sum()
    p = counts / total
    return float(-(p * np.log2(p)).sum())


def entropy(x) -> float:
    """Shannon entropy in bits of a discrete sequence."""
    codes, _ = _codes(x)
    if codes.size == 0:
        return 0.0
    return _entropy_from_counts(np.bincount(codes))


def _joint_entropy(cx, nx, cy, ny):
    return _entropy_from_counts(np.bincount(cx * ny + cy, minlength=nx * ny))


def _check_pair(x, y):
    if len(x) != len(y):
        raise DataError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) == 0:
        raise DataError("information measures need at least one sample")


def mutual_information(x, y) -> float:
    """I(x; y) in bits for discrete sequences; clipped at 0."""
    _check_pair(x, y)
    cx, nx = _codes(x)
    cy, ny = _codes(y)
    hx = _entropy_from_counts(np.bincount(cx))
    hy = _entropy_from_counts(np.bincount(cy))
    return max(0.0, hx + hy - _joint_entropy(cx, nx, cy, ny))


def symmetrical_uncertainty(x, y) -> float:
    """2 I(x;y) / (H(x) + H(y)), in [0, 1]; 0 when both entropies vanish."""
    _check_pair(x, y)
    cx, nx = _codes(x)
    cy, ny = _codes(y)
    hx = _entropy_from_counts(np.bincount(cx))
    hy = _entropy_from_counts(np.bincount(cy))
    if hx + hy <= 0.0:
        return 0.0
    mi = max(0.0, hx + hy - _joint_entropy(cx, nx, cy, ny))
    return min(1.0, 2.0 * mi / (hx + hy))


# ---------------------------------------------------------------------------
# CFS


@dataclass(frozen=True, eq=False)
class AssociationMatrix:
    feature_class: np.ndarray
    feature_feature: np.ndarray

    @property
    def k(self) -> int:
        return self.feature_class.shape[0]


def _discretized(data: Dataset, num_bins: int):
    return [discretize(data.features[:, j], num_bins) for j in range(data.n_features)]


def build_association_matrix(data: Dataset, num_bins: int = 10) -> AssociationMatrix:
    """Symmetrical uncertainty between every feature and the label, and between feature pairs."""
    if data.n_samples < 2:
        raise DataError("association matrix needs at least two samples")
    cols = _discretized(data, num_bins)
    k = data.n_features
    codes = [_codes(c) for c in cols]
    ent = [_entropy_from_counts(np.bincount(c)) for c, _ in codes]
    label_codes = _codes(data.labels)
    label_ent = _entropy_from_counts(np.bincount(label_codes[0]))

    def su(a, ha, b, hb):
        if ha + hb <= 0.0:
            return 0.0
        mi = max(0.0, ha + hb - _joint_entropy(a[0], a[1], b[0], b[1]))
        return min(1.0, 2.0 * mi / (ha + hb))

    fc = np.array([su(codes[j], ent[j], label_codes, label_ent) for j in range(k)])
    ff = np.zeros((k, k))
    for i in range(k):
        ff[i, i] = 1.0 if ent[i] > 0 else 0.0
        for j in range(i + 1, k):
            ff[i, j] = ff[j, i] = su(codes[i], ent[i], codes[j], ent[j])
    return AssociationMatrix(fc, ff)


def cfs_merit(subset, assoc: AssociationMatrix) -> float:
    """CFS merit s*mean(r_cf) / sqrt(s + s(s-1)*mean(r_ff)).

    Indices are sorted before summing so the value does not depend on order.
    """
    idx = sorted(int(i) for i in subset)
    if not idx:
        raise ConfigError("cfs_merit of an empty subset")
    if len(set(idx)) != len(idx) or idx[0] < 0 or idx[-1] >= assoc.k:
        raise ConfigError(f"invalid feature indices {idx}")
    s = len(idx)
    r_cf = float(sum(assoc.feature_class[i] for i in idx)) / s
    if s == 1:
        return r_cf
    if r_cf == 0.0:
        return 0.0
    pair_sum = 0.0
    for a in range(s):
        for b in range(a + 1, s):
            pair_sum += assoc.feature_feature[idx[a], idx[b]]
    r_ff = pair_sum / (s * (s - 1) / 2)
    return s * r_cf / math.sqrt(s + s * (s - 1) * r_ff)


# Up to this many features the search runs to completion (2^k - 1 subsets).
EXHAUSTIVE_K = 10


def _better(merit, subset, best_merit, best_subset):
    if merit != best_merit:
        return merit > best_merit
    return (len(subset), subset) < (len(best_subset), best_subset)


def cfs_select(
    data: Dataset,
    num_bins: int = 10,
    patience: int = 5,
    assoc: AssociationMatrix | None = None,
) -> FeatureSubset:
    """Forward best-first search for the subset of maximal CFS merit.

    Starts from the empty set and repeatedly expands the most promising open
    subset by one feature. Stops after ``patience`` consecutive expansions
    that fail to raise the best merit, or when nothing is left to expand.
    With at most ``EXHAUSTIVE_K`` features the patience limit is lifted, so
    every subset is visited and the result is the exact maximizer.
    Equal merits prefer the smaller subset, then lexicographic indices.
    """
    if assoc is None:
        assoc = build_association_matrix(data, num_bins)
    k = assoc.k
    if k < 1:
        raise DataError("no features to select from")

    limit = math.inf if k <= EXHAUSTIVE_K else patience
    best, best_merit = (), 0.0
    open_heap = [(-0.0, 0, ())]
    visited = {()}
    stale = 0
    while open_heap and stale < limit:
        _, _, node = heapq.heappop(open_heap)
        improved = False
        for f in range(k):
            if f in node:
                continue
            child = tuple(sorted(node + (f,)))
            if child in visited:
                continue
            visited.add(child)
            merit = cfs_merit(child, assoc)
            heapq.heappush(open_heap, (-merit, len(child), child))
            if not best or _better(merit, child, best_merit, best):
                improved = improved or not best or merit > best_merit
                best, best_merit = child, merit
        stale = 0 if improved else stale + 1

    return FeatureSubset(best, SelectionMethod.CFS, tuple(assoc.feature_class[i] for i in best))


# ---------------------------------------------------------------------------
# mRMR


def mrmr_rank(data: Dataset, top_k: int, num_bins: int = 10) -> FeatureSubset:
    """Greedy mRMR ranking with the difference (relevance - mean redundancy) criterion.

    Mutual information is measured in bits on equal-frequency discretized
    columns. Scores are the criterion values at the time of each pick.
    """
    k = data.n_features
    if not 1 <= top_k <= k:
        raise ConfigError(f"top_k must be in [1, {k}], got {top_k}")
    cols = [_codes(c) for c in _discretized(data, num_bins)]
    ent = np.array([_entropy_from_counts(np.bincount(c)) for c, _ in cols])
    label = _codes(data.labels)
    label_ent = _entropy_from_counts(np.bincount(label[0]))

    def mi(a, ha, b, hb):
        return max(0.0, ha + hb - _joint_entropy(a[0], a[1], b[0], b[1]))

    relevance = np.array([mi(cols[j], ent[j], label, label_ent) for j in range(k)])
    redundancy = np.zeros(k)
    chosen = []
    scores = []
    remaining = np.ones(k, dtype=bool)
    for step in range(top_k):
        criterion = relevance if step == 0 else relevance - redundancy / step
        masked = np.where(remaining, criterion, -np.inf)
        pick = int(np.argmax(masked))
        chosen.append(pick)
        scores.append(float(criterion[pick]))
        remaining[pick] = False
        for j in np.flatnonzero(remaining):
            redundancy[j] += mi(cols[j], ent[j], cols[pick], ent[pick])
    return FeatureSubset(chosen, SelectionMethod.MRMR, scores)


# ---------------------------------------------------------------------------
# RFE and IRM

RFE_FOREST = ForestConfig(num_trees=25)


def rfe_rank(data: Dataset, top_k: int, forest_config: ForestConfig = RFE_FOREST) -> FeatureSubset:
    """Recursive feature elimination driven by forest Gini importances.

    One feature is dropped per round (the least important; the higher index
    on ties). The survivors are returned ordered by their importance in the
    final forest, which is also their score.
    """
    k = data.n_features
    if not 1 <= top_k <= k:
        raise ConfigError(f"top_k must be in [1, {k}], got {top_k}")
    surviving = list(range(k))
    while True:
        model = train_forest(data.select_features(surviving), forest_config)
        imp = model.importances
        if len(surviving) == top_k:
            order = sorted(range(len(surviving)), key=lambda p: (-imp[p], surviving[p]))
            return FeatureSubset(
                [surviving[p] for p in order],
                SelectionMethod.RFE,
                [float(imp[p]) for p in order],
            )
        lowest = imp.min()
        drop = max(p for p in range(len(surviving)) if imp[p] == lowest)
        del surviving[drop]


def irm_select(
    data: Dataset,
    top_n: int = 25,
    forest_config: ForestConfig = RFE_FOREST,
    num_bins: int = 10,
) -> FeatureSubset:
    """Features ranked in the top ``top_n`` by both RF-RFE and mRMR, ascending by index.

    An empty intersection is returned as an empty subset with an
    :class:`EmptySelectionWarning`.
    """
    if not 1 <= top_n <= data.n_features:
        raise ConfigError(f"top_n must be in [1, {data.n_features}], got {top_n}")
    rfe = rfe_rank(data, top_n, forest_config)
    mrmr = mrmr_rank(data, top_n, num_bins)
    common = sorted(set(rfe.indices) & set(mrmr.indices))
    if not common:
        warnings.warn("RFE and mRMR top sets do not intersect", EmptySelectionWarning, stacklevel=2)
    return FeatureSubset(common, SelectionMethod.IRM)
