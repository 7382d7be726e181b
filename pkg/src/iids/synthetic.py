"""Desk-scale synthetic datasets with controllable class skew and separation."""

from __future__ import annotations

import math

import numpy as np

from .data import Dataset
from .errors import ConfigError

__all__ = ["generate_synthetic", "imbalanced_fixture"]


def _directions(rng, n, dim):
    """``n`` unit vectors in ``dim`` dimensions, mutually orthogonal when ``n <= dim``."""
    gauss = rng.standard_normal((dim, max(n, 1)))
    if n <= dim:
        q, r = np.linalg.qr(gauss)
        q = q * np.sign(np.diag(r))
        return q[:, :n].T
    return (gauss / np.linalg.norm(gauss, axis=0)).T


def generate_synthetic(
    num_classes: int,
    class_counts,
    k_informative: int,
    k_noise: int,
    class_separation: float,
    seed: int = 0,
    class_names=None,
) -> Dataset:
    """Gaussian class clusters plus standard-normal nuisance columns.

    Each class is a unit-variance Gaussian around its own centre. Centres
    lie along randomly rotated orthonormal directions scaled so that every
    pair is exactly ``2 * class_separation`` apart (when ``k_informative <
    num_classes`` the directions are random unit vectors and the distance
    only holds on average). Informative columns come first (``inf0``, ...),
    then noise (``noise0``, ...). Rows are shuffled.
    """
    counts = [int(c) for c in class_counts]
    if num_classes < 1 or len(counts) != num_classes:
        raise ConfigError(f"need {num_classes} class counts, got {len(counts)}")
    if any(c < 1 for c in counts):
        raise ConfigError("every class count must be >= 1")
    if k_informative < 1 or k_noise < 0:
        raise ConfigError("k_informative must be >= 1 and k_noise >= 0")
    if class_separation < 0:
        raise ConfigError("class_separation must be non-negative")
    if class_names is None:
        class_names = [f"class{c}" for c in range(num_classes)]
    if len(class_names) != num_classes:
        raise ConfigError("class_names must have one entry per class")

    rng = np.random.default_rng(seed)
    centres = class_separation * math.sqrt(2.0) * _directions(rng, num_classes, k_informative)

    blocks, labels = [], []
    for c, n in enumerate(counts):
        informative = centres[c] + rng.standard_normal((n, k_informative))
        noise = rng.standard_normal((n, k_noise))
        blocks.append(np.hstack([informative, noise]))
        labels.append(np.full(n, c, dtype=np.intp))
    features = np.vstack(blocks)
    labels = np.concatenate(labels)
    order = rng.permutation(labels.size)
    names = [f"inf{j}" for j in range(k_informative)] + [f"noise{j}" for j in range(k_noise)]
    return Dataset(features[order], labels[order], names, class_names)


# Eight classes spanning three orders of magnitude (8000 down to 8).
IMBALANCED_COUNTS = (8000, 3000, 1200, 500, 200, 80, 30, 8)


def imbalanced_fixture(seed: int = 0, separation: float = 1.0) -> Dataset:
    """The skewed eight-class benchmark: 10 informative and 20 noise columns."""
    return generate_synthetic(8, IMBALANCED_COUNTS, 10, 20, separation, seed)
