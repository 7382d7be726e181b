# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tree kernels. Mirrors ``_kernels_py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free
from libc.math cimport log2
from libc.string cimport memset

cnp.import_array()

ctypedef cnp.intp_t intp

cdef double MIN_GAIN = 1e-12
# Scores within this relative band of the incumbent count as ties.
cdef double TIE_EPS = 1e-12

cdef struct Pair:
    double value
    intp label


cdef inline void _swap(Pair* p, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef Pair t = p[i]
    p[i] = p[j]
    p[j] = t


cdef inline double _median3(Pair* p, Py_ssize_t n) noexcept nogil:
    cdef double a = p[0].value, b = p[n // 2].value, c = p[n - 1].value
    if a < b:
        if b < c:
            return b
        return c if a < c else a
    if a < c:
        return a
    return c if b < c else b


cdef void _sift_down(Pair* p, Py_ssize_t start, Py_ssize_t end) noexcept nogil:
    cdef Py_ssize_t child, maxind, root = start
    while True:
        child = root * 2 + 1
        maxind = root
        if child < end and p[maxind].value < p[child].value:
            maxind = child
        if child + 1 < end and p[maxind].value < p[child + 1].value:
            maxind = child + 1
        if maxind == root:
            return
        _swap(p, root, maxind)
        root = maxind


cdef void _heapsort(Pair* p, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t start = (n - 2) // 2, end = n
    while start >= 0:
        _sift_down(p, start, n)
        start -= 1
    end = n - 1
    while end > 0:
        _swap(p, 0, end)
        _sift_down(p, 0, end)
        end -= 1


cdef void _introsort(Pair* p, Py_ssize_t n, int maxd) noexcept nogil:
    # Three-way partition quicksort; heapsort past the depth limit.
    cdef double pivot
    cdef Py_ssize_t i, l, r, j
    cdef Pair t
    while n > 1:
        if n <= 16:
            for i in range(1, n):
                t = p[i]
                j = i
                while j > 0 and p[j - 1].value > t.value:
                    p[j] = p[j - 1]
                    j -= 1
                p[j] = t
            return
        if maxd <= 0:
            _heapsort(p, n)
            return
        maxd -= 1
        pivot = _median3(p, n)
        i = l = 0
        r = n
        while i < r:
            if p[i].value < pivot:
                _swap(p, i, l)
                i += 1
                l += 1
            elif p[i].value > pivot:
                r -= 1
                _swap(p, i, r)
            else:
                i += 1
        _introsort(p, l, maxd)
        p += r
        n -= r


cdef inline double _midpoint(double a, double b) noexcept nogil:
    cdef double t = a / 2.0 + b / 2.0
    if t >= b:
        t = a
    return t


def best_split(const double[:, ::1] xt, const intp[::1] y, rows, features,
               int n_classes, int min_samples_leaf):
    cdef const intp[::1] r = np.ascontiguousarray(rows, dtype=np.intp)
    cdef const intp[::1] feats = np.ascontiguousarray(features, dtype=np.intp)
    cdef Py_ssize_t n = r.shape[0]
    if n < 2 or n < 2 * min_samples_leaf:
        return -1, 0.0, 0.0

    cdef Pair* pairs = <Pair*>malloc(n * sizeof(Pair))
    cdef long long* parent = <long long*>malloc(n_classes * sizeof(long long))
    cdef long long* left = <long long*>malloc(n_classes * sizeof(long long))
    if pairs == NULL or parent == NULL or left == NULL:
        free(pairs); free(parent); free(left)
        raise MemoryError()

    cdef Py_ssize_t i, fi, f
    cdef intp c
    cdef long long sq_parent = 0, sq_left, sq_right, right_c
    cdef long long nl, nr
    cdef double proxy, best_proxy = -1.0, best_t = 0.0
    cdef double limit = -1.0
    cdef intp best_f = -1
    cdef double base, gain

    with nogil:
        memset(parent, 0, n_classes * sizeof(long long))
        for i in range(n):
            parent[y[r[i]]] += 1
        for c in range(n_classes):
            sq_parent += parent[c] * parent[c]

        for fi in range(feats.shape[0]):
            f = feats[fi]
            for i in range(n):
                pairs[i].value = xt[f, r[i]]
                pairs[i].label = y[r[i]]
            _introsort(pairs, n, 2 * <int>log2(n))

            memset(left, 0, n_classes * sizeof(long long))
            sq_left = 0
            sq_right = sq_parent
            for i in range(n - 1):
                c = pairs[i].label
                sq_left += 2 * left[c] + 1
                left[c] += 1
                right_c = parent[c] - left[c] + 1
                sq_right -= 2 * right_c - 1
                if pairs[i].value == pairs[i + 1].value:
                    continue
                nl = i + 1
                nr = n - nl
                if nl < min_samples_leaf or nr < min_samples_leaf:
                    continue
                proxy = (<double>sq_left) / (<double>nl) + (<double>sq_right) / (<double>nr)
                if proxy > limit:
                    best_proxy = proxy
                    limit = best_proxy + TIE_EPS * best_proxy
                    best_f = f
                    best_t = _midpoint(pairs[i].value, pairs[i + 1].value)

    free(pairs); free(parent); free(left)

    if best_f < 0:
        return -1, 0.0, 0.0
    base = (<double>sq_parent) / (<double>n)
    gain = (best_proxy - base) / n
    if not gain > MIN_GAIN:
        return -1, 0.0, 0.0
    return int(best_f), best_t, gain


def apply_tree(const int[::1] feature, const double[::1] threshold,
               const int[::1] left, const int[::1] right, x):
    cdef const double[:, :] xv = np.asarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], i
    out = np.empty(n, dtype=np.intp)
    cdef intp[::1] o = out
    cdef int node
    with nogil:
        for i in range(n):
            node = 0
            while feature[node] >= 0:
                if xv[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            o[i] = node
    return out
