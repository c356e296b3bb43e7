"""Feature extraction contracts: hand values, scaling laws, spectra."""

import math

import numpy as np
import pytest

from wristchannel import features
from wristchannel.errors import EmptyDataset, SeriesTooShort
from wristchannel.signal import GyroTrace

RATE = 60.0


def axis(series):
    return features.extract_axis_features(np.asarray(series, dtype=float), RATE)


def by_name(vec, name):
    return vec[features.AXIS_FEATURE_NAMES.index(name)]


class TestHandValues:
    def test_basic_statistics(self):
        # padded to the minimum length with an exact repeating pattern
        x = [1, 2, 3] * 4
        vec = axis(x)
        assert by_name(vec, "mean") == 2.0
        assert by_name(vec, "abs_energy") == 14.0 * 4
        assert by_name(vec, "sum") == 24.0
        assert by_name(vec, "median") == 2.0

    def test_strikes(self):
        x = [0, 5, 5, 5, 0, 0, 0, 0]  # mean 1.875; below-runs 1 and 4
        vec = axis(x)
        assert by_name(vec, "strike_above_mean") == 3.0
        assert by_name(vec, "strike_below_mean") == 4.0

    def test_changes(self):
        x = [0, 1, 3, 6, 6, 6, 6, 6]
        vec = axis(x)
        diffs = np.diff(x)
        assert by_name(vec, "mean_change") == pytest.approx(diffs.mean())
        assert by_name(vec, "abs_sum_changes") == 6.0
        assert by_name(vec, "mean_abs_change") == pytest.approx(6.0 / 7)
        assert by_name(vec, "cid") == pytest.approx(math.sqrt(1 + 4 + 9))

    def test_constant_series_sentinels(self):
        vec = axis(np.full(16, 2.5))
        for name in ("std", "variance", "skewness", "kurtosis",
                     "sample_entropy", "autocorr_lag1", "autocorr_lag2",
                     "spectral_centroid", "spectral_spread", "spectral_slope"):
            assert by_name(vec, name) == 0.0
        assert by_name(vec, "spectral_flatness") == pytest.approx(1.0)
        assert by_name(vec, "mean") == 2.5

    def test_quantiles_linear_interpolation(self):
        x = np.arange(9, dtype=float)
        vec = axis(x)
        assert by_name(vec, "quantile_75") == 6.0
        assert by_name(vec, "quantile_25") == 2.0
        assert by_name(vec, "iqr") == 4.0

    def test_moments_match_numpy_conventions(self):
        rng = np.random.default_rng(1)
        x = rng.normal(3, 2, 100)
        vec = axis(x)
        assert by_name(vec, "std") == pytest.approx(x.std())
        assert by_name(vec, "variance") == pytest.approx(x.var())
        assert by_name(vec, "sem") == pytest.approx(x.std() / 10)
        assert by_name(vec, "mad") == pytest.approx(np.mean(np.abs(x - x.mean())))
        c = x - x.mean()
        assert by_name(vec, "skewness") == pytest.approx(
            np.mean(c ** 3) / x.std() ** 3)
        assert by_name(vec, "kurtosis") == pytest.approx(
            np.mean(c ** 4) / x.var() ** 2 - 3)
        acov1 = float(c[:-1] @ c[1:]) / x.size
        assert by_name(vec, "autocov_lag1") == pytest.approx(acov1)
        assert by_name(vec, "autocorr_lag1") == pytest.approx(acov1 / x.var())


class TestSampleEntropy:
    def test_constant_is_zero(self):
        assert features.sample_entropy(np.full(30, 1.0)) == 0.0

    def test_known_small_case(self):
        # hand-checkable: regular alternation has highly predictable windows
        x = np.asarray([0.0, 1.0] * 10)
        se = features.sample_entropy(x)
        assert se == 0.0  # every m-match extends to an (m+1)-match

    def test_noise_has_positive_entropy(self):
        rng = np.random.default_rng(2)
        se = features.sample_entropy(rng.normal(0, 1, 150))
        assert 0.5 < se < 4.0

    def test_finite_everywhere(self):
        rng = np.random.default_rng(3)
        for n in (8, 9, 12, 40):
            assert math.isfinite(features.sample_entropy(rng.normal(0, 1, n)))


class TestSpectral:
    def test_pure_tone_centroid(self):
        n = 120
        f0 = 6.0  # exactly bin 12 of a 120-sample window at 60 Hz
        t = np.arange(n) / RATE
        vec = axis(np.sin(2 * math.pi * f0 * t))
        bin_width = RATE / n
        assert abs(by_name(vec, "spectral_centroid") - f0) <= bin_width
        assert by_name(vec, "spectral_spread") <= 2 * bin_width
        assert abs(by_name(vec, "spectral_rolloff") - f0) <= bin_width

    def test_tone_shift_invariance(self):
        n = 120
        t = np.arange(n) / RATE
        x = np.sin(2 * math.pi * 6.0 * t)
        base = by_name(axis(x), "spectral_centroid")
        # a time shift leaves DFT magnitudes (hence the centroid) unchanged
        rolled = by_name(axis(np.roll(x, 17)), "spectral_centroid")
        assert rolled == pytest.approx(base, abs=1e-9)
        # gating the tone behind leading silence only smears it by leakage
        gated = by_name(axis(np.concatenate([np.zeros(10), x])),
                        "spectral_centroid")
        assert abs(gated - base) <= 3 * RATE / n

    def test_flatness_ordering(self):
        rng = np.random.default_rng(4)
        t = np.arange(240) / RATE
        tone = by_name(axis(np.sin(2 * math.pi * 5 * t)), "spectral_flatness")
        noise = by_name(axis(rng.normal(0, 1, 240)), "spectral_flatness")
        assert 0 <= tone < 0.2 < noise <= 1.0

    def test_moment_distribution_normalized(self):
        # spectral moments are taken over a distribution that sums to 1:
        # scaling the series must not move centroid/spread/skew/kurtosis
        rng = np.random.default_rng(5)
        x = rng.normal(0, 1, 100)
        a, b = axis(x), axis(5.0 * x)
        for name in ("spectral_centroid", "spectral_spread",
                     "spectral_skewness", "spectral_kurtosis",
                     "spectral_rolloff", "spectral_flatness"):
            assert by_name(a, name) == pytest.approx(by_name(b, name), rel=1e-9)


SCALE_LINEAR = ("mean", "std", "iqr", "mad", "sem", "mean_change",
                "abs_sum_changes", "mean_abs_change", "sum", "quantile_75",
                "median", "quantile_25", "cid")
SCALE_QUADRATIC = ("abs_energy", "variance", "autocov_lag1", "autocov_lag2")
SCALE_INVARIANT = ("skewness", "kurtosis", "autocorr_lag1", "autocorr_lag2",
                   "strike_above_mean", "strike_below_mean",
                   "spectral_centroid", "spectral_spread", "spectral_rolloff",
                   "spectral_flatness")


class TestScaleBehavior:
    def test_scaling_laws(self):
        rng = np.random.default_rng(6)
        x = rng.normal(1, 2, 128)
        c = 3.0
        a, b = axis(x), axis(c * x)
        for name in SCALE_LINEAR:
            assert by_name(b, name) == pytest.approx(c * by_name(a, name), rel=1e-9)
        for name in SCALE_QUADRATIC:
            assert by_name(b, name) == pytest.approx(c * c * by_name(a, name), rel=1e-9)
        for name in SCALE_INVARIANT:
            assert by_name(b, name) == pytest.approx(by_name(a, name), rel=1e-9,
                                                     abs=1e-12)

    def test_slope_sign_invariant(self):
        rng = np.random.default_rng(7)
        x = rng.normal(0, 1, 128)
        a, b = axis(x), axis(4.0 * x)
        assert math.copysign(1, by_name(a, "spectral_slope")) == \
            math.copysign(1, by_name(b, "spectral_slope"))


class TestExtract:
    def make_trace(self, columns):
        xyz = np.stack(columns, axis=1)
        return GyroTrace.from_xyz(RATE, xyz)

    def test_vector_shape_and_names(self):
        rng = np.random.default_rng(8)
        tr = self.make_trace([rng.normal(0, 1, 64) for _ in range(3)])
        fv = features.extract(tr)
        assert fv.values.shape == (96,)
        assert len(features.FEATURE_NAMES) == 96
        assert fv.names[0] == "x_mean" and fv.names[32] == "y_mean"

    def test_axis_symmetry(self):
        rng = np.random.default_rng(9)
        same = rng.normal(0, 1, 64)
        other = rng.normal(0, 1, 64)
        fv = features.extract(self.make_trace([same, same, other]))
        assert np.array_equal(fv.values[:32], fv.values[32:64])

    def test_too_short(self):
        with pytest.raises(SeriesTooShort):
            features.extract(self.make_trace([np.ones(4)] * 3))


class TestStandardizer:
    def test_identical_vectors_zscore_zero(self):
        mat = np.tile(np.arange(96, dtype=float), (5, 1))
        std = features.fit_standardizer(mat)
        z = features.apply_standardizer(std, mat)
        assert np.allclose(z, 0.0)

    def test_two_point_symmetry(self):
        mat = np.stack([np.zeros(96), np.full(96, 2.0)])
        z = features.apply_standardizer(features.fit_standardizer(mat), mat)
        assert np.allclose(z[0], -1.0) and np.allclose(z[1], 1.0)

    def test_self_application_centers(self):
        rng = np.random.default_rng(10)
        mat = rng.normal(3, 5, (40, 96))
        z = features.apply_standardizer(features.fit_standardizer(mat), mat)
        assert np.all(np.abs(z.mean(axis=0)) < 1e-9)

    def test_empty_dataset(self):
        with pytest.raises(EmptyDataset):
            features.fit_standardizer(np.empty((0, 96)))


def test_feature_csv_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    vecs = [features.FeatureVector(rng.normal(0, 1, 96)) for _ in range(4)]
    labels = ["A", "B", "C", "E"]
    path = tmp_path / "features.csv"
    features.write_feature_csv(path, vecs, labels)
    mat, got_labels = features.read_feature_csv(path)
    assert got_labels == labels
    assert np.allclose(mat, np.stack([v.values for v in vecs]), rtol=1e-11)
