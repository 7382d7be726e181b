"""End-to-end orchestration of the FW1-FW4 frameworks.

Stage order for one run: relabel, split, scale (fit on train only), select
features (train only), balance (train only), train forest, predict test,
evaluate.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .balancing import BalanceMethod, random_oversample
from .data import Dataset, LabelHierarchy, Level, ScalerParams, SplitSpec, fit_scaler, relabel, split_indices
from .errors import ConfigError, EmptySelectionWarning, IIDSError, StageError
from .evaluation import (
    USC_THRESHOLD,
    GainReport,
    MetricsReport,
    compute_metrics,
    confusion_matrix,
    f1_gain,
    identify_usc,
)
from .forest import ForestConfig, ForestModel, train_forest
from .selection import RFE_FOREST, FeatureSubset, SelectionMethod, cfs_select, irm_select

__all__ = [
    "ExperimentResult",
    "FrameworkConfig",
    "parse_framework",
    "run_batch",
    "run_framework",
]

SELECTORS = (SelectionMethod.ALL, SelectionMethod.CFS, SelectionMethod.IRM)


def framework_family(selector, balancer) -> str:
    selected = SelectionMethod(selector) is not SelectionMethod.ALL
    balanced = BalanceMethod(balancer) is not BalanceMethod.NONE
    return {(False, False): "FW1", (False, True): "FW2", (True, False): "FW3", (True, True): "FW4"}[
        (selected, balanced)
    ]


def framework_label(selector, balancer) -> str:
    family = framework_family(selector, balancer)
    parts = [p.value for p in (SelectionMethod(selector), BalanceMethod(balancer)) if p.value not in ("ALL", "NONE")]
    return family if not parts else f"{family}:{'+'.join(parts)}"


def parse_framework(text: str):
    """``"FW4:CFS+BRFC"`` -> ``(SelectionMethod.CFS, BalanceMethod.BRFC)``.

    The family prefix is optional (``"CFS+ROS"``) but must agree with the
    components when given.
    """
    text = text.strip()
    family, _, rest = text.partition(":")
    if not rest and not family.upper().startswith("FW"):
        family, rest = "", family
    selector, balancer = SelectionMethod.ALL, BalanceMethod.NONE
    for token in filter(None, (t.strip().upper() for t in rest.split("+"))):
        if token in ("CFS", "IRM", "ALL"):
            selector = SelectionMethod(token)
        elif token in ("ROS", "BRFC", "NONE"):
            balancer = BalanceMethod(token)
        else:
            raise ConfigError(f"unknown framework component {token!r} in {text!r}")
    if family and family.upper() != framework_family(selector, balancer):
        raise ConfigError(f"{text!r}: components describe {framework_family(selector, balancer)}")
    return selector, balancer


@dataclass(frozen=True)
class FrameworkConfig:
    """One framework run. BRFC forces the forest into balanced-bootstrap mode."""

    selector: SelectionMethod = SelectionMethod.ALL
    balancer: BalanceMethod = BalanceMethod.NONE
    level: Level = Level.FINE
    forest: ForestConfig = field(default_factory=ForestConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    num_bins: int = 10
    irm_top_n: int = 25
    rfe_forest: ForestConfig = RFE_FOREST
    usc_threshold: float = USC_THRESHOLD
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "selector", SelectionMethod(self.selector))
        object.__setattr__(self, "balancer", BalanceMethod(self.balancer))
        object.__setattr__(self, "level", Level(self.level))
        if self.selector not in SELECTORS:
            raise ConfigError(f"selector must be one of {[s.value for s in SELECTORS]}")
        if self.num_bins < 1 or self.irm_top_n < 1:
            raise ConfigError("num_bins and irm_top_n must be >= 1")
        balanced = self.forest.bootstrap_mode == "balanced"
        if self.balancer is BalanceMethod.BRFC and not balanced:
            object.__setattr__(self, "forest", replace(self.forest, bootstrap_mode="balanced"))
        elif self.balancer is not BalanceMethod.BRFC and balanced:
            raise ConfigError("balanced bootstrap requires balancer BRFC")
        if self.name is None:
            object.__setattr__(self, "name", framework_label(self.selector, self.balancer))

    @property
    def family(self) -> str:
        return framework_family(self.selector, self.balancer)

    def baseline(self) -> "FrameworkConfig":
        """FW1 with identical split, forest and level settings."""
        return replace(
            self,
            selector=SelectionMethod.ALL,
            balancer=BalanceMethod.NONE,
            forest=replace(self.forest, bootstrap_mode="standard"),
            name=None,
        )


@dataclass
class ExperimentResult:
    framework: FrameworkConfig
    selected_features: FeatureSubset
    feature_names: tuple
    metrics: MetricsReport
    gain: GainReport | None = None
    timings: dict = field(default_factory=dict)
    model: ForestModel | None = None
    # Stage inputs kept for auditing: scaler, train/test rows, balanced counts.
    trace: dict = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.framework.name

    @property
    def level(self) -> Level:
        return self.framework.level


class _Stages:
    def __init__(self):
        self.timings = {}

    def run(self, stage, fn, *args, **kwargs):
        start = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except StageError:
            raise
        except (IIDSError, ValueError, ArithmeticError) as exc:
            raise StageError(stage, exc) from exc
        finally:
            self.timings[stage] = time.perf_counter() - start


def _select(train: Dataset, config: FrameworkConfig) -> FeatureSubset:
    if config.selector is SelectionMethod.ALL:
        return FeatureSubset.all_features(train.n_features)
    if config.selector is SelectionMethod.CFS:
        return cfs_select(train, config.num_bins)
    top_n = min(config.irm_top_n, train.n_features)
    with warnings.catch_warnings():
        warnings.simplefilter("error", EmptySelectionWarning)
        try:
            return irm_select(train, top_n, config.rfe_forest, config.num_bins)
        except EmptySelectionWarning as exc:
            raise ConfigError(f"IRM selected no features: {exc}") from None


def _balance(train: Dataset, config: FrameworkConfig):
    """Training set for the forest plus the per-class counts each tree sees."""
    counts = train.class_counts()
    if config.balancer is BalanceMethod.ROS:
        balanced = random_oversample(train, config.forest.seed)
        return balanced, balanced.class_counts()
    if config.balancer is BalanceMethod.BRFC:
        per_class = config.forest.per_class_count
        if per_class is None:
            per_class = int(counts.min())
        if np.any(counts == 0):
            raise ConfigError("BRFC needs every class present in the training split")
        return train, np.full(train.n_classes, per_class, dtype=np.int64)
    return train, counts


def run_framework(
    data: Dataset,
    config: FrameworkConfig,
    baseline: ExperimentResult | None = None,
    hierarchy: LabelHierarchy | None = None,
) -> ExperimentResult:
    """Run one framework end to end; errors are raised as :class:`StageError`."""
    stages = _Stages()
    data = stages.run("relabel", relabel, data, hierarchy, config.level)
    train_rows, test_rows = stages.run(
        "split", split_indices, data.labels, data.n_classes, config.split
    )
    train_raw, test_raw = data.take(train_rows), data.take(test_rows)

    def scale():
        params = fit_scaler(train_raw)
        return params, train_raw.with_features(params.transform(train_raw.features)), test_raw.with_features(
            params.transform(test_raw.features)
        )

    scaler, train, test = stages.run("scale", scale)
    subset = stages.run("select", _select, train, config)
    if len(subset) == 0:
        raise StageError("select", ConfigError("no features selected"))
    train = train.select_features(subset.indices)
    test = test.select_features(subset.indices)

    fit_data, tree_counts = stages.run("balance", _balance, train, config)
    model = stages.run(
        "train", train_forest, fit_data, config.forest, scaler.subset(subset.indices)
    )
    predicted = stages.run("predict", model.predict, test.features)

    def evaluate():
        cm = confusion_matrix(test.labels, predicted, data.n_classes, data.class_names)
        metrics = compute_metrics(cm)
        gain = None
        if baseline is not None:
            if baseline.level is not config.level:
                raise ConfigError("baseline was run at a different class level")
            usc = identify_usc(baseline.metrics, config.usc_threshold)
            gain = f1_gain(baseline.metrics, metrics, usc)
        return cm, metrics, gain

    cm, metrics, gain = stages.run("evaluate", evaluate)
    trace = {
        "scaler": scaler,
        "train_rows": train_rows,
        "test_rows": test_rows,
        "selection_rows": train_raw.n_samples,
        "balanced_counts": np.asarray(tree_counts),
        "confusion": cm,
    }
    return ExperimentResult(
        framework=config,
        selected_features=subset,
        feature_names=tuple(subset.names(data.feature_names)),
        metrics=metrics,
        gain=gain,
        timings=stages.timings,
        model=model,
        trace=trace,
    )


def run_batch(data: Dataset, configs, hierarchy: LabelHierarchy | None = None) -> list:
    """Run every config, each compared with FW1 at its own class level.

    FW1 runs first per level (its result is reused when the batch contains
    it, otherwise run implicitly and included at the front). Output keeps
    config order.
    """
    configs = list(configs)
    baselines = {}
    for cfg in configs:
        if cfg.family == "FW1" and cfg.level not in baselines:
            baselines[cfg.level] = run_framework(data, cfg, hierarchy=hierarchy)
    results = []
    for cfg in configs:
        if cfg.level not in baselines:
            base = run_framework(data, cfg.baseline(), hierarchy=hierarchy)
            baselines[cfg.level] = base
            results.append(base)
        base = baselines[cfg.level]
        if cfg.family == "FW1" and base.framework == cfg:
            result = base
            result.gain = f1_gain(base.metrics, base.metrics, identify_usc(base.metrics, cfg.usc_threshold))
        else:
            result = run_framework(data, cfg, base, hierarchy)
        results.append(result)
    return results
