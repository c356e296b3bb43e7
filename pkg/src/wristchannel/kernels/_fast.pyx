# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot kernels.

Mirrors ``_ref.py`` operation for operation; arithmetic is arranged so both
backends return bit-identical results.
"""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15u
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9u
cdef uint64_t MIX2 = 0x94D049BB133111EBu
cdef double INV53 = 2.0 ** -53


def sample_entropy_counts(x, int m, double r):
    """Pair counts (B, A) for sample entropy; see _ref for the contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xa = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xa.shape[0]
    cdef Py_ssize_t nt = n - m
    if nt < 2:
        return 0, 0
    cdef double[::1] xv = xa
    cdef Py_ssize_t i, j, k
    cdef double dmax, d
    cdef int64_t b = 0, a = 0
    cdef bint ok
    for i in range(nt - 1):
        for j in range(i + 1, nt):
            dmax = 0.0
            ok = True
            for k in range(m):
                d = xv[i + k] - xv[j + k]
                if d < 0.0:
                    d = -d
                if d > dmax:
                    dmax = d
                if dmax > r:
                    ok = False
                    break
            if not ok:
                continue
            b += 1
            d = xv[i + m] - xv[j + m]
            if d < 0.0:
                d = -d
            if d > dmax:
                dmax = d
            if dmax <= r:
                a += 1
    return int(b), int(a)


def best_split_column(values, labels, int n_classes, int min_leaf):
    """Best Gini split of one feature column; see _ref for the contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] va = np.ascontiguousarray(values, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ya = np.ascontiguousarray(labels, dtype=np.int64)
    cdef Py_ssize_t n = va.shape[0]
    if n < 2 * min_leaf:
        return False, 0.0, np.inf
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.argsort(va, kind="stable")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = va[order]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] y = ya[order]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cl = np.zeros(n_classes, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cr = np.bincount(y, minlength=n_classes).astype(np.int64)
    cdef int64_t[::1] clv = cl
    cdef int64_t[::1] crv = cr
    cdef double[::1] vv = v
    cdef int64_t[::1] yv = y
    cdef int64_t sumsq_l = 0, sumsq_r = 0
    cdef Py_ssize_t c
    for c in range(n_classes):
        sumsq_r += crv[c] * crv[c]
    cdef Py_ssize_t i
    cdef int64_t cls, nl, nr
    cdef double gl, gr, score
    cdef double best_score = np.inf
    cdef double best_thr = 0.0
    cdef bint found = False
    for i in range(n - 1):
        cls = yv[i]
        sumsq_l += 2 * clv[cls] + 1
        clv[cls] += 1
        sumsq_r -= 2 * crv[cls] - 1
        crv[cls] -= 1
        nl = i + 1
        nr = n - nl
        if vv[i] == vv[i + 1] or nl < min_leaf or nr < min_leaf:
            continue
        gl = 1.0 - sumsq_l / <double> (nl * nl)
        gr = 1.0 - sumsq_r / <double> (nr * nr)
        score = (nl * gl + nr * gr) / <double> n
        if score < best_score:
            best_score = score
            best_thr = (vv[i] + vv[i + 1]) / 2.0
            found = True
    if not found:
        return False, 0.0, np.inf
    return True, best_thr, best_score


def still_run_bounds(mask, int min_len):
    """Maximal True runs at least min_len long; see _ref for the contract."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] ma = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t n = ma.shape[0]
    cdef cnp.uint8_t[::1] mv = ma
    cdef list out = []
    cdef Py_ssize_t i = 0, start
    while i < n:
        if mv[i]:
            start = i
            while i < n and mv[i]:
                i += 1
            if i - start >= min_len:
                out.append((start, i))
        else:
            i += 1
    if not out:
        return np.empty((0, 2), dtype=np.int64)
    return np.asarray(out, dtype=np.int64)


cdef inline double _unit(uint64_t seed_mixed, uint64_t counter) nogil:
    cdef uint64_t z = seed_mixed + counter * GOLDEN
    z = z + GOLDEN
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    z = z ^ (z >> 31)
    return <double> (z >> 11) * INV53


def exam_trials(seed_mixed, trial_start, n_trials, int n_questions, int r,
                double p, double alpha, double q_wrong):
    """Counter-based exam simulation; see _ref for the contract."""
    cdef uint64_t seed = <uint64_t> seed_mixed
    cdef uint64_t t0 = <uint64_t> trial_start
    cdef Py_ssize_t nt = <Py_ssize_t> n_trials
    cdef Py_ssize_t t, q
    cdef uint64_t g
    cdef int correct
    cdef int64_t passed = 0, total = 0
    cdef double u1, u2
    with nogil:
        for t in range(nt):
            correct = 0
            for q in range(n_questions):
                g = (t0 + <uint64_t> t) * <uint64_t> n_questions + <uint64_t> q
                u1 = _unit(seed, g * 2u)
                u2 = _unit(seed, g * 2u + 1u)
                if u1 < p:
                    if u2 < alpha:
                        correct += 1
                else:
                    if u2 < q_wrong:
                        correct += 1
            total += correct
            if correct >= r:
                passed += 1
    return int(passed), int(total)
