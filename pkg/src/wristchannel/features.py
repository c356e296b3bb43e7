"""Temporal + spectral feature extraction for symbol gesture segments.

Each axis of a gyroscope segment yields 32 statistics in a fixed order (21
temporal, 8 spectral, 3 extra parameter variants: autocorrelation lag 2,
quantile 0.25, autocovariance lag 2).  A full segment is the concatenation
X || Y || Z, 96 values.  The order is a stable file contract; reorder only
with a schema version bump.

Conventions: population (ddof=0) variance everywhere; quantiles by linear
interpolation; Fisher (excess) kurtosis with constant-series skew/kurtosis
defined as 0; spectra from the mean-removed series, rectangular window,
one-sided magnitudes with the DC bin excluded, and all spectral moments on
the magnitude distribution normalized to sum 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EmptyDataset, SeriesTooShort

MIN_SERIES_LEN = 8

AXIS_FEATURE_NAMES = (
    "mean",
    "std",
    "iqr",
    "abs_energy",
    "mad",
    "sem",
    "mean_change",
    "autocov_lag1",
    "strike_above_mean",
    "variance",
    "abs_sum_changes",
    "kurtosis",
    "sample_entropy",
    "autocorr_lag1",
    "mean_abs_change",
    "sum",
    "skewness",
    "quantile_75",
    "median",
    "strike_below_mean",
    "cid",
    "spectral_centroid",
    "spectral_flatness",
    "spectral_kurtosis",
    "spectral_skewness",
    "spectral_decrease",
    "spectral_spread",
    "spectral_rolloff",
    "spectral_slope",
    "autocorr_lag2",
    "quantile_25",
    "autocov_lag2",
)

AXES = ("x", "y", "z")

FEATURE_NAMES = tuple(f"{axis}_{name}" for axis in AXES for name in AXIS_FEATURE_NAMES)


@dataclass(frozen=True)
class FeatureSpec:
    """Fixed parameters of the per-axis feature list."""

    axis_features: tuple = AXIS_FEATURE_NAMES
    sample_entropy_m: int = 2
    sample_entropy_r_factor: float = 0.2
    rolloff_fraction: float = 0.85

    def __post_init__(self):
        if len(self.axis_features) != 32:
            raise ValueError("feature spec must list exactly 32 per-axis features")


DEFAULT_SPEC = FeatureSpec()


@dataclass(frozen=True)
class FeatureVector:
    """96 finite reals describing one gesture segment."""

    values: np.ndarray
    names: tuple = FEATURE_NAMES

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (96,):
            raise ValueError(f"feature vector must have 96 values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            bad = [self.names[i] for i in np.flatnonzero(~np.isfinite(v))]
            raise ValueError(f"non-finite features: {bad}")
        object.__setattr__(self, "values", v)


def _longest_run(mask: np.ndarray) -> int:
    if not mask.any():
        return 0
    padded = np.concatenate(([0], mask.view(np.int8), [0]))
    edges = np.diff(padded)
    return int(np.max(np.flatnonzero(edges == -1) - np.flatnonzero(edges == 1)))


def _autocov(x: np.ndarray, mean: float, lag: int) -> float:
    n = x.size
    if lag >= n:
        return 0.0
    d = x - mean
    return float(np.dot(d[:-lag], d[lag:]) / n)


def sample_entropy(x: np.ndarray, m: int = 2, r_factor: float = 0.2) -> float:
    """Sample entropy with Chebyshev tolerance r = r_factor * std.

    Returns 0.0 for a constant series (no variation) or when no length-m
    template pairs match; when no length-(m+1) pair matches, returns the
    finite ceiling log(B + 1) instead of +inf.
    """
    x = np.asarray(x, dtype=np.float64)
    sigma = float(x.std())
    if sigma == 0.0:
        return 0.0
    b, a = kernels.sample_entropy_counts(x, m, r_factor * sigma)
    if b == 0:
        return 0.0
    if a == 0:
        return math.log(b + 1.0)
    return -math.log(a / b)


def _spectral(x: np.ndarray, sample_rate_hz: float, rolloff_fraction: float):
    """The 8 spectral statistics, in vector order."""
    mags = np.abs(np.fft.rfft(x - x.mean()))[1:]
    freqs = np.fft.rfftfreq(x.size, d=1.0 / sample_rate_hz)[1:]
    total = float(mags.sum())
    eps = 1e-20
    flatness = float(np.exp(np.mean(np.log(mags + eps))) / (np.mean(mags) + eps))
    if total == 0.0:
        return [0.0, flatness, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    p = mags / total
    centroid = float(np.dot(p, freqs))
    dev = freqs - centroid
    spread = float(math.sqrt(np.dot(p, dev * dev)))
    if spread > 0.0:
        skew = float(np.dot(p, dev ** 3) / spread ** 3)
        kurt = float(np.dot(p, dev ** 4) / spread ** 4 - 3.0)
    else:
        skew = 0.0
        kurt = 0.0
    tail = mags[1:]
    denom = float(tail.sum())
    if denom > 0.0:
        decrease = float(np.sum((tail - mags[0]) / np.arange(1, mags.size)) / denom)
    else:
        decrease = 0.0
    energy = mags * mags
    cum = np.cumsum(energy)
    idx = int(np.searchsorted(cum, rolloff_fraction * cum[-1]))
    rolloff = float(freqs[min(idx, freqs.size - 1)])
    fdev = freqs - freqs.mean()
    slope = float(np.dot(fdev, mags - mags.mean()) / np.dot(fdev, fdev))
    return [centroid, flatness, kurt, skew, decrease, spread, rolloff, slope]


def extract_axis_features(series, sample_rate_hz: float,
                          spec: FeatureSpec = DEFAULT_SPEC) -> np.ndarray:
    """The 32 per-axis statistics, in the fixed documented order."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < MIN_SERIES_LEN:
        raise SeriesTooShort(
            f"need a 1-d series of at least {MIN_SERIES_LEN} samples, got {x.shape}")
    n = x.size
    mean = float(x.mean())
    var = float(x.var())
    std = math.sqrt(var)
    diffs = np.diff(x)
    q25, med, q75 = (float(v) for v in np.quantile(x, [0.25, 0.5, 0.75]))
    centered = x - mean
    if var > 0.0:
        m3 = float(np.mean(centered ** 3))
        m4 = float(np.mean(centered ** 4))
        skewness = m3 / std ** 3
        kurtosis = m4 / var ** 2 - 3.0
    else:
        skewness = 0.0
        kurtosis = 0.0
    acov1 = _autocov(x, mean, 1)
    acov2 = _autocov(x, mean, 2)
    out = [
        mean,
        std,
        q75 - q25,
        float(np.dot(x, x)),
        float(np.mean(np.abs(centered))),
        std / math.sqrt(n),
        float(diffs.mean()),
        acov1,
        float(_longest_run(x > mean)),
        var,
        float(np.sum(np.abs(diffs))),
        kurtosis,
        sample_entropy(x, spec.sample_entropy_m, spec.sample_entropy_r_factor),
        acov1 / var if var > 0.0 else 0.0,
        float(np.mean(np.abs(diffs))),
        float(x.sum()),
        skewness,
        q75,
        med,
        float(_longest_run(x < mean)),
        float(math.sqrt(np.dot(diffs, diffs))),
    ]
    out.extend(_spectral(x, sample_rate_hz, spec.rolloff_fraction))
    out.extend([
        acov2 / var if var > 0.0 else 0.0,
        q25,
        acov2,
    ])
    return np.asarray(out, dtype=np.float64)


def extract(segment, spec: FeatureSpec = DEFAULT_SPEC) -> FeatureVector:
    """96-dimensional feature vector of a gyroscope segment (X || Y || Z)."""
    rate = segment.sample_rate_hz
    parts = [extract_axis_features(axis, rate, spec)
             for axis in (segment.x, segment.y, segment.z)]
    return FeatureVector(np.concatenate(parts))


@dataclass(frozen=True)
class Standardizer:
    """Per-feature z-scoring parameters, fitted on training data only."""

    mean: np.ndarray
    std: np.ndarray

    def transform(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.mean) / np.maximum(self.std, 1e-12)


def _as_matrix(dataset) -> np.ndarray:
    if isinstance(dataset, np.ndarray):
        mat = dataset
    else:
        rows = [fv.values if isinstance(fv, FeatureVector) else fv for fv in dataset]
        mat = np.asarray(rows, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise EmptyDataset("standardizer needs at least one feature vector")
    return mat


def fit_standardizer(dataset) -> Standardizer:
    """Per-feature mean and population std over the dataset rows."""
    mat = _as_matrix(dataset)
    return Standardizer(mean=mat.mean(axis=0), std=mat.std(axis=0))


def apply_standardizer(standardizer: Standardizer, data):
    """Z-score a FeatureVector, a raw row, or a matrix of rows."""
    if isinstance(data, FeatureVector):
        return FeatureVector(standardizer.transform(data.values), data.names)
    arr = np.asarray(data, dtype=np.float64)
    return standardizer.transform(arr)


def write_feature_csv(path, vectors, labels):
    """Feature matrix file: one row per segment, a trailing label column."""
    vectors = list(vectors)
    labels = list(labels)
    if len(vectors) != len(labels):
        raise ValueError("one label per vector required")
    with open(str(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(FEATURE_NAMES) + ["label"])
        for fv, label in zip(vectors, labels):
            vals = fv.values if isinstance(fv, FeatureVector) else np.asarray(fv)
            w.writerow([f"{v:.12g}" for v in vals] + [str(label)])


def read_feature_csv(path):
    """Read a feature matrix file back into (matrix, labels)."""
    with open(str(path), newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    if tuple(header[:-1]) != FEATURE_NAMES or header[-1] != "label":
        raise ValueError("unrecognized feature file header")
    mat = np.asarray([[float(v) for v in row[:-1]] for row in rows[1:]], dtype=np.float64)
    labels = [row[-1] for row in rows[1:]]
    return mat, labels
