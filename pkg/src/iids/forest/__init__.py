"""From-scratch random forest: Gini CART trees, standard and balanced bootstraps."""

from .core import (
    ForestConfig,
    ForestModel,
    Tree,
    gini_impurity,
    grow_tree,
    predict,
    train_forest,
    tree_importances,
)
from .io import load_model, save_model
from .kernels import BACKEND, best_split

__all__ = [
    "BACKEND",
    "ForestConfig",
    "ForestModel",
    "Tree",
    "best_split",
    "gini_impurity",
    "grow_tree",
    "load_model",
    "predict",
    "save_model",
    "train_forest",
    "tree_importances",
]
