"""Experiment batch configuration.

A config file is flat ``key = value`` text; ``#`` starts a comment. Every
key is optional::

    frameworks = FW1, FW2:BRFC, FW3:CFS, FW4:CFS+BRFC   # run in this order
    levels = fine34, category8, binary2
    seed = 0                    # split and forest seed
    train_fraction = 0.8
    stratified = true
    label_column = label
    hierarchy = path/to/hierarchy.txt    # default: the shipped CICIoT2023 map
    num_trees = 100
    max_depth = none
    min_samples_leaf = 1
    features_per_split = sqrt  # sqrt | all | an integer
    per_class_count = none     # BRFC draws per class; none = minority count
    n_jobs = 1
    num_bins = 10
    irm_top_n = 25
    rfe_trees = 25
    usc_threshold = 0.99

Overrides (``key=value`` strings, e.g. from the command line) replace file
values before validation.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .data import Level, SplitSpec
from .errors import ConfigError
from .forest import ForestConfig
from .pipeline import FrameworkConfig, parse_framework

__all__ = ["ExperimentConfig", "load_config", "parse_config"]


def _bool(text):
    lowered = text.lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text):
    return None if text.lower() == "none" else int(text)


def _list(text):
    return tuple(item.strip() for item in text.split(",") if item.strip())


def _features_per_split(text):
    return text if text in ("sqrt", "all") else int(text)


@dataclass(frozen=True)
class ExperimentConfig:
    frameworks: tuple = ("FW1", "FW2:BRFC", "FW3:CFS", "FW4:CFS+BRFC")
    levels: tuple = ("fine34", "category8", "binary2")
    seed: int = 0
    train_fraction: float = 0.8
    stratified: bool = True
    label_column: str = "label"
    hierarchy: str | None = None
    num_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    features_per_split: object = "sqrt"
    per_class_count: int | None = None
    n_jobs: int = 1
    num_bins: int = 10
    irm_top_n: int = 25
    rfe_trees: int = 25
    usc_threshold: float = 0.99

    def forest(self) -> ForestConfig:
        return ForestConfig(
            num_trees=self.num_trees,
            max_depth=self.max_depth,
            min_samples_leaf=self.min_samples_leaf,
            features_per_split=self.features_per_split,
            per_class_count=self.per_class_count,
            seed=self.seed,
            n_jobs=self.n_jobs,
        )

    def framework_configs(self) -> list:
        """One :class:`FrameworkConfig` per (level, framework), levels outermost."""
        forest = self.forest()
        split = SplitSpec(self.train_fraction, self.seed, self.stratified)
        rfe = ForestConfig(num_trees=self.rfe_trees, seed=self.seed)
        out = []
        for level in self.levels:
            for text in self.frameworks:
                selector, balancer = parse_framework(text)
                out.append(
                    FrameworkConfig(
                        selector=selector,
                        balancer=balancer,
                        level=level,
                        forest=forest,
                        split=split,
                        num_bins=self.num_bins,
                        irm_top_n=self.irm_top_n,
                        rfe_forest=rfe,
                        usc_threshold=self.usc_threshold,
                    )
                )
        return out


_PARSERS = {
    "frameworks": _list,
    "levels": _list,
    "seed": int,
    "train_fraction": float,
    "stratified": _bool,
    "label_column": str,
    "hierarchy": lambda t: None if t.lower() == "none" else t,
    "num_trees": int,
    "max_depth": _optional_int,
    "min_samples_leaf": int,
    "features_per_split": _features_per_split,
    "per_class_count": _optional_int,
    "n_jobs": int,
    "num_bins": int,
    "irm_top_n": int,
    "rfe_trees": int,
    "usc_threshold": float,
}
assert set(_PARSERS) == {f.name for f in fields(ExperimentConfig)}


def _split_pair(text, where):
    key, sep, value = text.partition("=")
    if not sep:
        raise ConfigError(f"{where}: expected 'key = value', got {text!r}")
    key = key.strip()
    if key not in _PARSERS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    return key, value.strip()


def _build(raw: dict) -> ExperimentConfig:
    values = {}
    for key, (text, where) in raw.items():
        try:
            values[key] = _PARSERS[key](text)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key}: {exc}") from None
    config = replace(ExperimentConfig(), **values)
    try:
        for level in config.levels:
            Level(level)
        config.framework_configs()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if not config.frameworks or not config.levels:
        raise ConfigError("frameworks and levels must be non-empty")
    return config


def parse_config(text: str, overrides=(), source: str = "<config>") -> ExperimentConfig:
    raw = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, value = _split_pair(line, f"{source}:{line_no}")
        raw[key] = (value, f"{source}:{line_no}")
    for item in overrides:
        key, value = _split_pair(item, "override")
        raw[key] = (value, "override")
    return _build(raw)


def load_config(path=None, overrides=()) -> ExperimentConfig:
    """Read ``path`` (defaults only when None) and apply ``overrides``."""
    if path is None:
        return parse_config("", overrides)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, overrides, str(path))
