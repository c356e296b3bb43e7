#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Runs each hot kernel on representative workloads with both backends,
checks the outputs agree exactly, and prints timings with speedups.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from wristchannel.kernels import _ref

try:
    from wristchannel.kernels import _fast
except ImportError:
    _fast = None


def _time(fn, args, repeat):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def _workloads():
    rng = np.random.default_rng(42)
    series = rng.normal(0, 1, 200)
    yield ("sample_entropy_counts (n=200, m=2)",
           "sample_entropy_counts", (series, 2, 0.2 * series.std()))
    col = rng.normal(0, 1, 2000)
    labels = rng.integers(0, 4, 2000)
    yield ("best_split_column (n=2000, 4 classes)",
           "best_split_column", (col, labels, 4, 1))
    mask = (rng.random(2_000_000) < 0.7).astype(np.uint8)
    yield ("still_run_bounds (n=2e6)", "still_run_bounds", (mask, 30))
    yield ("exam_trials (2e4 trials x 50 questions)",
           "exam_trials", (12345, 0, 20_000, 50, 35, 0.9, 0.9, 0.1 / 3))


def _equal(a, b):
    if isinstance(a, np.ndarray):
        return np.array_equal(a, b)
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_equal(x, y) for x, y in zip(a, b))
    return a == b


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _fast is None:
        print("compiled backend not available; build with pip install -e .")
        return 1
    width = 46
    print(f"{'kernel':<{width}} {'numpy':>10} {'cython':>10} {'speedup':>8}  match")
    for label, name, call_args in _workloads():
        t_ref, r_ref = _time(getattr(_ref, name), call_args, args.repeat)
        t_fast, r_fast = _time(getattr(_fast, name), call_args, args.repeat)
        match = "yes" if _equal(r_ref, r_fast) else "NO"
        print(f"{label:<{width}} {t_ref * 1e3:>8.2f}ms {t_fast * 1e3:>8.2f}ms "
              f"{t_ref / t_fast:>7.1f}x  {match}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
