"""Kernel contracts: brute-force oracles plus cross-backend equality."""

import math

import numpy as np
import pytest

from wristchannel.kernels import _ref

try:
    from wristchannel.kernels import _fast
    BACKENDS = [("numpy", _ref), ("cython", _fast)]
except ImportError:
    _fast = None
    BACKENDS = [("numpy", _ref)]

needs_fast = pytest.mark.skipif(_fast is None, reason="compiled backend not built")


# --- brute-force oracles ---------------------------------------------------

def sampen_counts_brute(x, m, r):
    n = len(x)
    nt = n - m
    b = a = 0
    for i in range(nt - 1):
        for j in range(i + 1, nt):
            dm = max(abs(x[i + k] - x[j + k]) for k in range(m))
            if dm <= r:
                b += 1
                if max(dm, abs(x[i + m] - x[j + m])) <= r:
                    a += 1
    return b, a


def best_split_brute(values, labels, n_classes, min_leaf):
    n = len(values)
    order = np.argsort(values, kind="stable")
    v = np.asarray(values)[order]
    y = np.asarray(labels)[order]
    best = (np.inf, None)
    for i in range(n - 1):
        if v[i] == v[i + 1]:
            continue
        nl, nr = i + 1, n - i - 1
        if nl < min_leaf or nr < min_leaf:
            continue
        cl = np.bincount(y[:i + 1], minlength=n_classes).astype(np.int64)
        cr = np.bincount(y[i + 1:], minlength=n_classes).astype(np.int64)
        gl = 1.0 - np.sum(cl * cl) / (nl * nl)
        gr = 1.0 - np.sum(cr * cr) / (nr * nr)
        score = (nl * gl + nr * gr) / n
        if score < best[0]:
            best = (score, (v[i] + v[i + 1]) / 2.0)
    if best[1] is None:
        return False, 0.0, np.inf
    return True, best[1], best[0]


def runs_brute(mask, min_len):
    out = []
    i = 0
    n = len(mask)
    while i < n:
        if mask[i]:
            j = i
            while j < n and mask[j]:
                j += 1
            if j - i >= min_len:
                out.append((i, j))
            i = j
        else:
            i += 1
    return np.asarray(out, dtype=np.int64).reshape(-1, 2)


@pytest.mark.parametrize("name,impl", BACKENDS)
class TestAgainstBruteForce:
    def test_sample_entropy_counts(self, name, impl):
        rng = np.random.default_rng(7)
        for n in (10, 25, 60):
            x = rng.normal(0, 1, n)
            r = 0.2 * x.std()
            assert impl.sample_entropy_counts(x, 2, r) == sampen_counts_brute(x, 2, r)

    def test_sample_entropy_constant(self, name, impl):
        x = np.full(20, 3.7)
        b, a = impl.sample_entropy_counts(x, 2, 0.0)
        nt = 20 - 2
        assert b == a == nt * (nt - 1) // 2

    def test_best_split(self, name, impl):
        rng = np.random.default_rng(11)
        for _ in range(40):
            n = int(rng.integers(4, 50))
            v = np.round(rng.normal(0, 1, n), 2)  # force ties
            y = rng.integers(0, 3, n)
            got = impl.best_split_column(v, y, 3, 1)
            want = best_split_brute(v, y, 3, 1)
            assert got[0] == want[0]
            if got[0]:
                assert got[1] == want[1] and got[2] == want[2]

    def test_best_split_constant_column(self, name, impl):
        found, _, score = impl.best_split_column(
            np.ones(10), np.arange(10, dtype=np.int64) % 2, 2, 1)
        assert not found and math.isinf(score)

    def test_still_runs(self, name, impl):
        rng = np.random.default_rng(3)
        for _ in range(30):
            mask = (rng.random(rng.integers(1, 400)) < 0.6).astype(np.uint8)
            got = impl.still_run_bounds(mask, 5)
            assert np.array_equal(got, runs_brute(mask, 5))

    def test_exam_trials_extremes(self, name, impl):
        passed, total = impl.exam_trials(123, 0, 500, 20, 10, 1.0, 1.0, 0.0)
        assert passed == 500 and total == 500 * 20
        passed, total = impl.exam_trials(123, 0, 500, 20, 1, 0.0, 1.0, 0.0)
        assert passed == 0 and total == 0


@needs_fast
class TestBackendParity:
    """The two backends must agree bit for bit."""

    def test_sample_entropy(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            x = rng.normal(0, 1, int(rng.integers(8, 200)))
            r = 0.2 * x.std()
            assert _ref.sample_entropy_counts(x, 2, r) == \
                _fast.sample_entropy_counts(x, 2, r)

    def test_best_split(self):
        rng = np.random.default_rng(22)
        for _ in range(300):
            n = int(rng.integers(2, 120))
            v = np.round(rng.normal(0, 1, n), int(rng.integers(1, 4)))
            y = rng.integers(0, 4, n)
            assert _ref.best_split_column(v, y, 4, 1) == \
                _fast.best_split_column(v, y, 4, 1)

    def test_still_runs(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            mask = (rng.random(int(rng.integers(1, 5000))) < 0.8).astype(np.uint8)
            assert np.array_equal(_ref.still_run_bounds(mask, 30),
                                  _fast.still_run_bounds(mask, 30))

    def test_exam_trials(self):
        for seed in (1, 99, 2**63):
            a = _ref.exam_trials(seed, 100, 5000, 50, 35, 0.9, 0.8, 0.05)
            b = _fast.exam_trials(seed, 100, 5000, 50, 35, 0.9, 0.8, 0.05)
            assert a == b

    def test_exam_trials_partition_independence(self):
        whole = _ref.exam_trials(7, 0, 4000, 30, 20, 0.7, 0.8, 0.1)
        p1 = _ref.exam_trials(7, 0, 1500, 30, 20, 0.7, 0.8, 0.1)
        p2 = _ref.exam_trials(7, 1500, 2500, 30, 20, 0.7, 0.8, 0.1)
        assert whole == (p1[0] + p2[0], p1[1] + p2[1])
