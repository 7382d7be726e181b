import itertools
import math
import warnings
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iids import selection
from iids.errors import ConfigError, DataError, EmptySelectionWarning
from iids.forest import ForestConfig
from iids.selection import (
    AssociationMatrix,
    FeatureSubset,
    SelectionMethod,
    build_association_matrix,
    cfs_merit,
    cfs_select,
    discretize,
    entropy,
    irm_select,
    load_subset,
    mrmr_rank,
    mutual_information,
    rfe_rank,
    save_subset,
    symmetrical_uncertainty,
)
from iids.synthetic import generate_synthetic

from .conftest import make_dataset

# ---- oracles ----------------------------------------------------------------


def rank_bins(column, num_bins):
    """Bin of each value from its rank, valid for distinct values."""
    n = len(column)
    ranks = np.empty(n, dtype=int)
    ranks[np.argsort(column)] = np.arange(n)
    return [min(num_bins - 1, r * num_bins // n) for r in ranks]


def counter_entropy(values):
    counts = Counter(values)
    n = sum(counts.values())
    return -sum(c / n * math.log2(c / n) for c in counts.values())


def counter_mi(x, y):
    return counter_entropy(list(x)) + counter_entropy(list(y)) - counter_entropy(list(zip(x, y)))


def counter_su(x, y):
    hx, hy = counter_entropy(list(x)), counter_entropy(list(y))
    return 0.0 if hx + hy == 0 else 2 * counter_mi(x, y) / (hx + hy)


def greedy_mrmr(columns, labels, top_k):
    """Plain-loop mRMR: relevance minus mean redundancy, lowest index on ties."""
    k = len(columns)
    relevance = [counter_mi(columns[j], labels) for j in range(k)]
    chosen = []
    while len(chosen) < top_k:
        best, best_score = None, None
        for j in range(k):
            if j in chosen:
                continue
            score = relevance[j]
            if chosen:
                score -= sum(counter_mi(columns[j], columns[s]) for s in chosen) / len(chosen)
            if best is None or score > best_score + 1e-12:
                best, best_score = j, score
        chosen.append(best)
    return chosen


def exhaustive_best_merit(assoc):
    return max(
        cfs_merit(subset, assoc)
        for s in range(1, assoc.k + 1)
        for subset in itertools.combinations(range(assoc.k), s)
    )


def random_dataset(seed, k, n=200, m=3):
    r = np.random.default_rng(seed)
    y = r.integers(0, m, n)
    strength = r.uniform(0, 1.5, k)
    x = r.normal(size=(n, k)) + strength * y[:, None]
    if k > 2:
        x[:, 1] = x[:, 0] + 0.3 * r.normal(size=n)  # a redundant pair
    return make_dataset(x, y, class_names=[f"c{i}" for i in range(m)])


# ---- discretization and information measures ------------------------------


def test_discretize_examples():
    assert discretize([1, 2, 3, 4], 2).tolist() == [0, 0, 1, 1]
    column = [5, 1, 3, 2, 4, 6]
    assert discretize(column, 3).tolist() == rank_bins(column, 3) == [2, 0, 1, 0, 1, 2]


def test_discretize_constant_column():
    assert discretize([7.0] * 9, 4).tolist() == [0] * 9


def test_discretize_ties_share_a_bin():
    bins = discretize([1, 1, 1, 1, 2, 3], 3)
    assert len(set(bins[:4].tolist())) == 1


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=60, unique=True),
       st.integers(1, 12))
def test_discretize_matches_rank_oracle(values, num_bins):
    assert discretize(values, num_bins).tolist() == rank_bins(np.array(values), num_bins)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=80), st.integers(1, 10))
def test_discretize_range_and_monotone(values, num_bins):
    bins = discretize(values, num_bins)
    assert bins.min() >= 0 and bins.max() < num_bins
    order = np.argsort(values, kind="stable")
    assert np.all(np.diff(bins[order]) >= 0)


def test_discretize_rejects_zero_bins():
    with pytest.raises(ConfigError):
        discretize([1.0], 0)


def test_entropy_examples():
    assert entropy([0, 1, 0, 1]) == pytest.approx(1.0)
    assert entropy([3, 3, 3]) == 0.0
    assert entropy(list(range(8))) == pytest.approx(3.0)


def test_su_examples():
    assert symmetrical_uncertainty([0, 0, 1, 1], [5, 5, 9, 9]) == pytest.approx(1.0)
    assert symmetrical_uncertainty([0, 1, 0, 1], [0, 0, 1, 1]) == pytest.approx(0.0, abs=1e-12)
    assert symmetrical_uncertainty([2, 2], [4, 4]) == 0.0


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 3)), min_size=1, max_size=50))
def test_information_measures_match_counter_oracle(pairs):
    x, y = zip(*pairs)
    assert mutual_information(x, y) == pytest.approx(counter_mi(x, y), abs=1e-9)
    su = symmetrical_uncertainty(x, y)
    assert su == pytest.approx(counter_su(x, y), abs=1e-9)
    assert su == symmetrical_uncertainty(y, x)
    assert 0.0 <= su <= 1.0


def test_length_mismatch():
    with pytest.raises(DataError):
        mutual_information([1, 2], [1])


def test_association_matrix_matches_oracle():
    data = random_dataset(3, 5)
    assoc = build_association_matrix(data, num_bins=10)
    bins = [rank_bins(data.features[:, j], 10) for j in range(5)]
    labels = data.labels.tolist()
    for i in range(5):
        assert assoc.feature_class[i] == pytest.approx(counter_su(bins[i], labels), abs=1e-9)
        for j in range(5):
            expected = 1.0 if i == j else counter_su(bins[i], bins[j])
            assert assoc.feature_feature[i, j] == pytest.approx(expected, abs=1e-9)
    assert np.array_equal(assoc.feature_feature, assoc.feature_feature.T)


# ---- CFS --------------------------------------------------------------------


def toy_assoc():
    fc = np.array([0.8, 0.8, 0.1])
    ff = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.5], [0.0, 0.5, 1.0]])
    return AssociationMatrix(fc, ff)


def test_cfs_merit_examples():
    assoc = toy_assoc()
    assert cfs_merit([0], assoc) == pytest.approx(0.8)
    assert cfs_merit([0, 1], assoc) == pytest.approx(1.6 / math.sqrt(2))
    assert cfs_merit([1, 0], assoc) == cfs_merit([0, 1], assoc)
    # s=3: mean r_cf 1.7/3, mean r_ff 0.5/3
    assert cfs_merit([0, 1, 2], assoc) == pytest.approx(1.7 / math.sqrt(3 + 6 * 0.5 / 3))


def test_cfs_merit_rejects_bad_subsets():
    with pytest.raises(ConfigError):
        cfs_merit([], toy_assoc())
    with pytest.raises(ConfigError):
        cfs_merit([0, 0], toy_assoc())
    with pytest.raises(ConfigError):
        cfs_merit([3], toy_assoc())


def test_cfs_select_on_toy_matrix():
    subset = cfs_select(None, assoc=toy_assoc())
    assert subset.indices == (0, 1)
    assert subset.method is SelectionMethod.CFS


def test_cfs_prefers_smaller_subset_on_ties():
    # Feature 2 has zero class association, so adding it only dilutes merit.
    fc = np.array([0.5, 0.5, 0.0])
    ff = np.eye(3)
    assoc = AssociationMatrix(fc, ff)
    assert cfs_select(None, assoc=assoc).indices == (0, 1)
    # Two identical singletons tie: the lower index wins.
    assoc = AssociationMatrix(np.array([0.5, 0.5]), np.ones((2, 2)))
    assert cfs_select(None, assoc=assoc).indices == (0,)


def test_cfs_label_copy_selected_alone(rng):
    y = rng.integers(0, 3, 300)
    x = rng.normal(size=(300, 5))
    x[:, 2] = y
    assert cfs_select(make_dataset(x, y)).indices == (2,)


def test_cfs_keeps_one_of_two_perfect_duplicates(rng):
    y = rng.integers(0, 2, 300)
    x = rng.normal(size=(300, 4))
    x[:, 1] = x[:, 3] = y
    assert cfs_select(make_dataset(x, y)).indices == (1,)


def test_cfs_drops_noise_and_duplicates():
    d = generate_synthetic(3, [300, 300, 300], 3, 5, 1.5, seed=4)
    picked = cfs_select(d).indices
    assert set(picked) <= {0, 1, 2}


@pytest.mark.parametrize("seed", range(8))
def test_cfs_reaches_exhaustive_maximum(seed):
    k = 4 + seed % 5
    assoc = build_association_matrix(random_dataset(seed, k))
    subset = cfs_select(None, assoc=assoc)
    assert cfs_merit(subset.indices, assoc) == exhaustive_best_merit(assoc)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_cfs_small_k_is_exact_argmax(k, seed):
    r = np.random.default_rng(seed)
    # Coarse values make exact merit ties common.
    fc = r.integers(0, 4, k) / 4
    ff = r.integers(0, 4, (k, k)) / 4
    ff = np.triu(ff, 1) + np.triu(ff, 1).T + np.eye(k)
    assoc = AssociationMatrix(fc, ff)
    candidates = [
        (-cfs_merit(s, assoc), len(s), s)
        for size in range(1, k + 1)
        for s in itertools.combinations(range(k), size)
    ]
    assert cfs_select(None, assoc=assoc).indices == min(candidates)[2]


def test_cfs_large_k_uses_patience():
    d = random_dataset(21, 14)
    subset = cfs_select(d, patience=1)
    assoc = build_association_matrix(d)
    assert cfs_merit(subset.indices, assoc) >= assoc.feature_class.max()


def test_cfs_select_deterministic():
    d = random_dataset(9, 7)
    assert cfs_select(d) == cfs_select(d)


# ---- mRMR -------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(6))
def test_mrmr_matches_greedy_oracle(seed):
    k = 3 + seed
    d = random_dataset(100 + seed, k)
    columns = [rank_bins(d.features[:, j], 10) for j in range(k)]
    expected = greedy_mrmr(columns, d.labels.tolist(), k)
    assert list(mrmr_rank(d, k).indices) == expected


def test_mrmr_ranks_exact_duplicate_last():
    d = generate_synthetic(2, [200, 200], 3, 0, 1.0, seed=2)
    x = np.hstack([d.features, d.features[:, :1]])
    dup = make_dataset(x, d.labels)
    ranking = mrmr_rank(dup, 4).indices
    # Once one copy is picked the other is fully redundant.
    assert ranking[-1] in (0, 3)


def test_mrmr_prefix_property():
    d = random_dataset(5, 6)
    full = mrmr_rank(d, 6)
    for top in range(1, 6):
        assert mrmr_rank(d, top).indices == full.indices[:top]


def test_mrmr_bad_top_k():
    with pytest.raises(ConfigError):
        mrmr_rank(random_dataset(0, 3), 4)


# ---- RFE and IRM ------------------------------------------------------------

SMALL_FOREST = ForestConfig(num_trees=8, seed=1)


def test_rfe_keeps_informative_feature():
    d = generate_synthetic(2, [150, 150], 1, 4, 2.0, seed=3)
    result = rfe_rank(d, 1, SMALL_FOREST)
    assert result.indices == (0,)
    assert result.scores == (1.0,)


def test_rfe_ranking_sorted_and_deterministic():
    d = generate_synthetic(3, [80, 80, 80], 2, 3, 1.0, seed=6)
    a = rfe_rank(d, 3, SMALL_FOREST)
    assert a == rfe_rank(d, 3, SMALL_FOREST)
    assert list(a.scores) == sorted(a.scores, reverse=True)
    assert sum(a.scores) == pytest.approx(1.0)


def test_irm_is_intersection():
    d = generate_synthetic(3, [80, 80, 80], 3, 4, 1.0, seed=8)
    irm = irm_select(d, 4, SMALL_FOREST)
    rfe = set(rfe_rank(d, 4, SMALL_FOREST).indices)
    mrmr = set(mrmr_rank(d, 4).indices)
    assert list(irm.indices) == sorted(rfe & mrmr)


def test_irm_empty_intersection_warns(monkeypatch):
    d = random_dataset(0, 4)
    monkeypatch.setattr(selection, "rfe_rank", lambda *a, **k: FeatureSubset((0,), "RFE"))
    monkeypatch.setattr(selection, "mrmr_rank", lambda *a, **k: FeatureSubset((1,), "MRMR"))
    with pytest.warns(EmptySelectionWarning):
        result = irm_select(d, 1)
    assert result.indices == ()


def test_irm_no_warning_when_nonempty():
    d = generate_synthetic(2, [100, 100], 2, 1, 2.0, seed=1)
    with warnings.catch_warnings():
        warnings.simplefilter("error", EmptySelectionWarning)
        assert len(irm_select(d, 3, SMALL_FOREST)) >= 1


# ---- subset files -----------------------------------------------------------


def test_subset_round_trip(tmp_path):
    names = ["a", "b", "c", "d"]
    for subset in (FeatureSubset((2, 0), "MRMR", (0.5, 0.25)), FeatureSubset((1, 3), "IRM")):
        save_subset(subset, names, tmp_path / "s.txt")
        assert load_subset(tmp_path / "s.txt", names) == subset


def test_subset_file_errors(tmp_path):
    path = tmp_path / "s.txt"
    path.write_text("method: CFS\nzzz\t0.1\n")
    with pytest.raises(DataError, match="unknown feature"):
        load_subset(path, ["a"])
    path.write_text("a\t0.1\n")
    with pytest.raises(DataError, match="method"):
        load_subset(path, ["a"])


def test_subset_validation():
    with pytest.raises(ConfigError):
        FeatureSubset((1, 1), "CFS")
    with pytest.raises(ConfigError):
        FeatureSubset((1,), "CFS", (0.1, 0.2))
