"""NumPy reference implementation of the hot kernels.

This backend is always available; the compiled extension in ``_fast.pyx``
implements the same four functions with identical arithmetic so results are
bit-for-bit interchangeable.  Any change here must be mirrored there (the
cross-backend equality tests enforce this).
"""

from __future__ import annotations

import numpy as np

_M64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_INV53 = float(2.0 ** -53)


def sample_entropy_counts(x: np.ndarray, m: int, r: float) -> tuple[int, int]:
    """Template-match pair counts for sample entropy.

    Counts pairs i < j <= n-m-1 whose length-``m`` windows are within
    Chebyshev distance ``r`` (count B) and likewise for length ``m+1``
    (count A).  Exact integer counts; the entropy value is computed by the
    caller.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    nt = n - m  # number of templates that can be extended to length m+1
    if nt < 2:
        return 0, 0
    d = np.abs(x[:, None] - x[None, :])
    # Chebyshev distance between windows starting at i and j.
    cm = d[:nt, :nt].copy()
    for k in range(1, m):
        np.maximum(cm, d[k:k + nt, k:k + nt], out=cm)
    cm1 = np.maximum(cm, d[m:m + nt, m:m + nt])
    iu = np.triu_indices(nt, k=1)
    b = int(np.count_nonzero(cm[iu] <= r))
    a = int(np.count_nonzero(cm1[iu] <= r))
    return b, a


def best_split_column(values: np.ndarray, labels: np.ndarray, n_classes: int,
                      min_leaf: int) -> tuple[bool, float, float]:
    """Best Gini split of one feature column.

    Returns ``(found, threshold, score)`` where score is the weighted Gini
    impurity of the two children.  Candidate thresholds are midpoints
    between distinct consecutive sorted values; the first strict minimum in
    sorted order wins so results are deterministic.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    n = values.shape[0]
    if n < 2 * min_leaf:
        return False, 0.0, np.inf
    order = np.argsort(values, kind="stable")
    v = values[order]
    y = labels[order]
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), y] = 1
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    # candidate split after position i (left = first i+1 samples)
    nl = np.arange(1, n, dtype=np.int64)
    nr = n - nl
    left = cum[:-1]
    right = total[None, :] - left
    sumsq_l = np.sum(left * left, axis=1)
    sumsq_r = np.sum(right * right, axis=1)
    gl = 1.0 - sumsq_l / (nl * nl)
    gr = 1.0 - sumsq_r / (nr * nr)
    score = (nl * gl + nr * gr) / n
    valid = (v[:-1] != v[1:]) & (nl >= min_leaf) & (nr >= min_leaf)
    if not np.any(valid):
        return False, 0.0, np.inf
    score = np.where(valid, score, np.inf)
    i = int(np.argmin(score))
    thr = (v[i] + v[i + 1]) / 2.0
    return True, float(thr), float(score[i])


def still_run_bounds(mask: np.ndarray, min_len: int) -> np.ndarray:
    """Maximal runs of True at least ``min_len`` long, as (start, end) rows.

    ``end`` is exclusive.  Returns an int64 array of shape (k, 2).
    """
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    padded = np.empty(mask.shape[0] + 2, dtype=np.int8)
    padded[0] = 0
    padded[-1] = 0
    padded[1:-1] = mask
    edges = np.diff(padded)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    keep = (ends - starts) >= min_len
    return np.stack([starts[keep], ends[keep]], axis=1).astype(np.int64)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z + _GOLDEN) & _M64
    z = ((z ^ (z >> np.uint64(30))) * _MIX1) & _M64
    z = ((z ^ (z >> np.uint64(27))) * _MIX2) & _M64
    return z ^ (z >> np.uint64(31))


def _unit(seed_mixed: int, counters: np.ndarray) -> np.ndarray:
    z = (np.uint64(seed_mixed) + counters * _GOLDEN) & _M64
    return (_mix(z) >> np.uint64(11)).astype(np.float64) * _INV53


def exam_trials(seed_mixed: int, trial_start: int, n_trials: int,
                n_questions: int, r: int, p: float, alpha: float,
                q_wrong: float) -> tuple[int, int]:
    """Simulate exam trials with counter-based randomness.

    Each (trial, question) consumes two SplitMix64 counters: one decides
    whether the answer writer knows the answer (prob ``p``), the second
    whether the recognition channel delivers the right option (``alpha`` if
    known, ``q_wrong`` otherwise).  Returns (trials passing with >= r
    correct, total correct answers).  Results depend only on the absolute
    trial indices, so any partitioning of the trial range is equivalent.
    """
    g = (np.arange(trial_start, trial_start + n_trials, dtype=np.uint64)[:, None]
         * np.uint64(n_questions)
         + np.arange(n_questions, dtype=np.uint64)[None, :])
    u1 = _unit(seed_mixed, g * np.uint64(2))
    u2 = _unit(seed_mixed, g * np.uint64(2) + np.uint64(1))
    correct = np.where(u1 < p, u2 < alpha, u2 < q_wrong)
    per_trial = np.count_nonzero(correct, axis=1)
    return int(np.count_nonzero(per_trial >= r)), int(per_trial.sum())
