import numpy as np
import pytest

from iids.data import Dataset


def make_dataset(features, labels, class_names=None, feature_names=None):
    features = np.asarray(features, dtype=float)
    if features.ndim == 1:
        features = features[:, None]
    labels = np.asarray(labels)
    if class_names is None:
        class_names = [f"c{i}" for i in range(int(labels.max()) + 1)]
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(features.shape[1])]
    return Dataset(features, labels, feature_names, class_names)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def blobs():
    """Two well-separated 4-feature Gaussian blobs, 100 rows each."""
    r = np.random.default_rng(7)
    x = np.vstack([r.normal(-3.0, 1.0, (100, 4)), r.normal(3.0, 1.0, (100, 4))])
    y = np.repeat([0, 1], 100)
    return make_dataset(x, y)
