import numpy as np
import pytest

from iids.balancing import BalanceMethod
from iids.data import Level, SplitSpec, load_hierarchy, split_indices
from iids.errors import ConfigError, StageError
from iids.forest import ForestConfig, train_forest
from iids.pipeline import FrameworkConfig, parse_framework, run_batch, run_framework
from iids.selection import SelectionMethod
from iids.synthetic import IMBALANCED_COUNTS, generate_synthetic, imbalanced_fixture

FAST = ForestConfig(num_trees=10, seed=0)


def fw(text, **kw):
    selector, balancer = parse_framework(text)
    kw.setdefault("forest", FAST)
    return FrameworkConfig(selector, balancer, **kw)


# ---- framework configs ------------------------------------------------------


@pytest.mark.parametrize(
    "text, expected",
    [
        ("FW1", ("ALL", "NONE")),
        ("FW2:ROS", ("ALL", "ROS")),
        ("FW3:IRM", ("IRM", "NONE")),
        ("FW4:CFS+BRFC", ("CFS", "BRFC")),
        ("cfs+ros", ("CFS", "ROS")),
    ],
)
def test_parse_framework(text, expected):
    selector, balancer = parse_framework(text)
    assert (selector.value, balancer.value) == expected


@pytest.mark.parametrize("text", ["FW1:CFS", "FW4:CFS", "FW2:SMOTE", "FW3:CFS+ROS"])
def test_parse_framework_rejects(text):
    with pytest.raises(ConfigError):
        parse_framework(text)


def test_framework_config_invariants():
    cfg = fw("FW4:CFS+BRFC")
    assert cfg.forest.bootstrap_mode == "balanced"
    assert cfg.family == "FW4" and cfg.name == "FW4:CFS+BRFC"
    base = cfg.baseline()
    assert base.family == "FW1" and base.forest.bootstrap_mode == "standard"
    with pytest.raises(ConfigError):
        FrameworkConfig(forest=ForestConfig(bootstrap_mode="balanced"))
    with pytest.raises(ConfigError):
        FrameworkConfig(selector=SelectionMethod.MRMR)


# ---- run_framework ----------------------------------------------------------


def test_fw1_on_separable_data():
    d = generate_synthetic(3, [200, 150, 100], 4, 2, 3.0, seed=1)
    result = run_framework(d, fw("FW1"))
    assert result.metrics.macro_f1 >= 0.95
    assert result.gain is None
    assert result.selected_features.method is SelectionMethod.ALL
    assert list(result.timings) == ["relabel", "split", "scale", "select", "balance", "train", "predict", "evaluate"]


@pytest.mark.parametrize("text", ["FW2:ROS", "FW3:CFS", "FW4:CFS+BRFC"])
def test_selected_features_all_only_for_all_selector(text):
    d = generate_synthetic(3, [120, 80, 40], 3, 4, 1.0, seed=2)
    result = run_framework(d, fw(text))
    expected_all = parse_framework(text)[0] is SelectionMethod.ALL
    assert (result.selected_features.method is SelectionMethod.ALL) == expected_all


def test_run_is_deterministic():
    d = generate_synthetic(3, [120, 60, 30], 3, 3, 1.0, seed=3)
    a = run_framework(d, fw("FW4:CFS+ROS"))
    b = run_framework(d, fw("FW4:CFS+ROS"))
    assert a.metrics == b.metrics
    assert a.selected_features == b.selected_features


def test_balancing_counts_recorded():
    d = generate_synthetic(3, [100, 40, 10], 2, 2, 1.0, seed=4)
    ros = run_framework(d, fw("FW2:ROS"))
    brfc = run_framework(d, fw("FW2:BRFC"))
    assert ros.trace["balanced_counts"].tolist() == [80, 80, 80]
    assert brfc.trace["balanced_counts"].tolist() == [8, 8, 8]
    assert brfc.model.trees[0].counts[0].tolist() == [8, 8, 8]


def test_model_carries_scaler_for_selected_columns():
    d = generate_synthetic(2, [100, 100], 2, 3, 2.0, seed=5)
    result = run_framework(d, fw("FW3:CFS"))
    assert result.model.scaler.k == len(result.selected_features)


def test_stage_errors_are_tagged():
    d = generate_synthetic(2, [50, 50], 2, 1, 1.0, seed=0)
    with pytest.raises(StageError) as info:
        run_framework(d, fw("FW1", level=Level.CATEGORY))
    assert info.value.stage == "relabel"
    with pytest.raises(StageError) as info:
        run_framework(d, fw("FW1", forest=ForestConfig(num_trees=2, features_per_split=9)))
    assert info.value.stage == "train"


def test_hierarchy_levels():
    h = load_hierarchy()
    names = ["BenignTraffic", "DDoS-ICMP_Flood", "DDoS-UDP_Flood", "SqlInjection"]
    d = generate_synthetic(4, [60, 60, 60, 60], 3, 1, 2.0, seed=6, class_names=names)
    cat = run_framework(d, fw("FW1", level=Level.CATEGORY), hierarchy=h)
    binary = run_framework(d, fw("FW1", level=Level.BINARY), hierarchy=h)
    assert cat.metrics.class_names == ("BenignTraffic", "DDoS", "Web-based")
    assert binary.metrics.class_names == ("benign", "attack")


# ---- batches and gains ------------------------------------------------------


def test_batch_adds_implicit_baseline():
    d = generate_synthetic(3, [100, 50, 20], 3, 3, 1.0, seed=7)
    results = run_batch(d, [fw("FW3:CFS"), fw("FW4:CFS+ROS")])
    assert [r.name for r in results] == ["FW1", "FW3:CFS", "FW4:CFS+ROS"]
    base = results[0]
    for r in results[1:]:
        assert r.gain.usc_classes == tuple(
            c for c, f in base.metrics.f1_by_class().items() if f < 0.99
        )


def test_batch_baseline_gain_is_zero():
    d = generate_synthetic(3, [100, 50, 20], 3, 3, 0.7, seed=8)
    (base,) = run_batch(d, [fw("FW1")])
    assert all(g == 0.0 for g in base.gain.per_class_gain.values())


def test_imbalanced_fixture_has_unsaturated_classes():
    d = imbalanced_fixture(seed=0)
    assert d.class_counts().tolist() == list(IMBALANCED_COUNTS)
    assert (d.n_features, d.n_classes) == (30, 8)
    (base,) = run_batch(d, [fw("FW1", forest=ForestConfig(num_trees=5))])
    assert len(base.gain.usc_classes) >= 1


# ---- synthetic generator ----------------------------------------------------


def test_generator_shape_and_names():
    d = generate_synthetic(2, [960, 40], 3, 2, 3.0, seed=0)
    assert d.class_counts().tolist() == [960, 40]
    assert d.feature_names == ("inf0", "inf1", "inf2", "noise0", "noise1")
    assert d.equals(generate_synthetic(2, [960, 40], 3, 2, 3.0, seed=0))


def test_generator_centre_distance():
    d = generate_synthetic(3, [4000, 4000, 4000], 5, 0, 2.0, seed=1)
    means = [d.features[d.labels == c].mean(axis=0) for c in range(3)]
    for a in range(3):
        for b in range(a + 1, 3):
            assert np.linalg.norm(means[a] - means[b]) == pytest.approx(4.0, abs=0.15)


def test_generator_extreme_skew_splits_unstratified():
    d = generate_synthetic(2, [5751, 1], 2, 1, 1.0, seed=0)
    train, test = split_indices(d.labels, 2, SplitSpec(stratified=False))
    assert train.size + test.size == 5752


def test_zero_separation_matches_majority_rate():
    accuracies = []
    for seed in range(10):
        d = generate_synthetic(2, [300, 100], 3, 0, 0.0, seed=seed)
        train, test = split_indices(d.labels, 2, SplitSpec(seed=seed))
        model = train_forest(d.take(train), ForestConfig(num_trees=15, seed=seed, min_samples_leaf=5))
        accuracies.append(np.mean(model.predict(d.take(test).features) == d.labels[test]))
    assert np.mean(accuracies) == pytest.approx(0.75, abs=0.05)


@pytest.mark.parametrize(
    "args",
    [(2, [10], 1, 0, 1.0), (2, [10, 0], 1, 0, 1.0), (2, [5, 5], 0, 1, 1.0), (2, [5, 5], 1, 0, -1.0)],
)
def test_generator_rejects_degenerate_specs(args):
    with pytest.raises(ConfigError):
        generate_synthetic(*args)


def test_balance_method_enum_round_trip():
    assert BalanceMethod("BRFC") is BalanceMethod.BRFC
