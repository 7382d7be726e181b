"""Numpy implementations of the tree kernels.

Must stay bit-for-bit equivalent to ``_kernels.pyx``: split scores are built
from exact int64 sums of squared class counts and combined with the same
float operations in the same order.
"""

import numpy as np

# Minimum Gini decrease for a split to count as an improvement.
MIN_GAIN = 1e-12
# Scores within this relative band of the incumbent count as ties, so exact
# rational ties resolve to the earlier candidate despite rounding.
TIE_EPS = 1e-12


def midpoint(a, b):
    t = a / 2.0 + b / 2.0
    if t >= b:
        t = a
    return t


def best_split(xt, y, rows, features, n_classes, min_samples_leaf):
    """Best Gini split of ``rows`` over ``features``.

    ``xt`` is the feature-major (k x N) training matrix. Returns
    ``(feature, threshold, gain)``; feature is -1 when no split has
    positive gain.
    """
    rows = np.asarray(rows, dtype=np.intp)
    n = rows.shape[0]
    if n < 2 or n < 2 * min_samples_leaf:
        return -1, 0.0, 0.0

    labels = y[rows]
    parent = np.bincount(labels, minlength=n_classes).astype(np.int64)
    sq_parent = int((parent * parent).sum())
    base = sq_parent / n
    eye = np.eye(n_classes, dtype=np.int64)
    n_left = np.arange(1, n, dtype=np.int64)
    n_right = n - n_left
    size_ok = (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)

    best_f, best_t, best_proxy = -1, 0.0, -1.0
    limit = -1.0
    for f in features:
        values = xt[f, rows]
        order = np.argsort(values, kind="stable")
        sv = values[order]
        left = np.cumsum(eye[labels[order]], axis=0)[:-1]
        right = parent - left
        sq_left = (left * left).sum(axis=1)
        sq_right = (right * right).sum(axis=1)
        proxy = sq_left / n_left + sq_right / n_right
        valid = size_ok & (sv[:-1] != sv[1:])
        proxy = np.where(valid, proxy, -np.inf)
        # Replays the sequential scan: each record must clear the tie band.
        while True:
            above = np.flatnonzero(proxy > limit)
            if above.size == 0:
                break
            i = int(above[0])
            best_f, best_proxy = int(f), float(proxy[i])
            limit = best_proxy + TIE_EPS * best_proxy
            best_t = midpoint(float(sv[i]), float(sv[i + 1]))

    if best_f < 0:
        return -1, 0.0, 0.0
    gain = (best_proxy - base) / n
    if not gain > MIN_GAIN:
        return -1, 0.0, 0.0
    return best_f, best_t, gain


def apply_tree(feature, threshold, left, right, x):
    """Leaf node index reached by each row of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    node = np.zeros(x.shape[0], dtype=np.intp)
    active = np.flatnonzero(feature[node] >= 0)
    while active.size:
        cur = node[active]
        f = feature[cur]
        go_left = x[active, f] <= threshold[cur]
        node[active] = np.where(go_left, left[cur], right[cur])
        active = active[feature[node[active]] >= 0]
    return node
