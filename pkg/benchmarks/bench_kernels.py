"""Compare the compiled tree kernels with the numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Reports the best of
several repeats for ``best_split`` at a few node sizes, for ``apply_tree``
and for training a small forest end to end, and checks that both backends
return identical results.
"""

import argparse
import timeit

import numpy as np

from iids.forest import ForestConfig, _kernels_py, train_forest
from iids.synthetic import generate_synthetic

try:
    from iids.forest import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_split(kernel, n, k, m, repeat):
    r = np.random.default_rng(0)
    xt = np.ascontiguousarray(r.normal(size=(k, n)))
    y = r.integers(0, m, n).astype(np.intp)
    rows = np.arange(n, dtype=np.intp)
    feats = np.arange(k, dtype=np.intp)
    result = kernel.best_split(xt, y, rows, feats, m, 1)
    return best_of(lambda: kernel.best_split(xt, y, rows, feats, m, 1), repeat), result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _kernels_c is None:
        print("compiled kernels are not built; only the fallback is available")
        return

    print(f"{'case':34s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}")

    def row(name, t_py, t_c):
        print(f"{name:34s} {t_py * 1e3:9.3f}ms {t_c * 1e3:9.3f}ms {t_py / t_c:7.1f}x")

    for n in (16, 256, 4096, 32768):
        t_py, a = bench_split(_kernels_py, n, 6, 8, args.repeat)
        t_c, b = bench_split(_kernels_c, n, 6, 8, args.repeat)
        assert a == b, (a, b)
        row(f"best_split n={n} k=6 classes=8", t_py, t_c)

    d = generate_synthetic(8, [2000] * 8, 10, 20, 1.0, seed=0)
    model = train_forest(d, ForestConfig(num_trees=1, seed=0))
    tree = model.trees[0]
    x = d.features
    args_ = (tree.feature, tree.threshold, tree.left, tree.right, x)
    assert np.array_equal(_kernels_py.apply_tree(*args_), _kernels_c.apply_tree(*args_))
    row(f"apply_tree rows={x.shape[0]} nodes={tree.node_count}",
        best_of(lambda: _kernels_py.apply_tree(*args_), args.repeat),
        best_of(lambda: _kernels_c.apply_tree(*args_), args.repeat))

    # End-to-end training swaps the kernels the forest code looks up.
    from iids.forest import kernels

    small = generate_synthetic(8, [600] * 8, 10, 20, 1.0, seed=1)
    cfg = ForestConfig(num_trees=5, seed=0)
    timings = {}
    for name, kernel in (("numpy", _kernels_py), ("cython", _kernels_c)):
        saved = kernels.best_split, kernels.apply_tree
        kernels.best_split, kernels.apply_tree = kernel.best_split, kernel.apply_tree
        try:
            timings[name] = best_of(lambda: train_forest(small, cfg), max(1, args.repeat // 2))
        finally:
            kernels.best_split, kernels.apply_tree = saved
    row("train_forest 4800 rows, 5 trees", timings["numpy"], timings["cython"])


if __name__ == "__main__":
    main()
