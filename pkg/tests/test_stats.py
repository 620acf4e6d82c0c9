"""Tests for KS distances, histograms and sample moments"""

import math

import numpy as np
import pytest
from scipy import stats

from lamlen.errors import DomainError
from lamlen.stats import (
    Histogram,
    MomentEstimate,
    ks_statistic,
    restrict,
    sample_moments,
    weighted_ks_statistic,
)


def uniform_cdf(x):
    return np.clip(x, 0.0, 1.0)


class TestKS:
    @pytest.mark.parametrize("n", [1, 10, 1000])
    def test_midpoint_quantiles(self, n):
        samples = (np.arange(1, n + 1) - 0.5) / n
        assert ks_statistic(samples, uniform_cdf) == pytest.approx(1 / (2 * n))

    def test_single_sample(self):
        assert ks_statistic([0.5], uniform_cdf) == pytest.approx(0.5)

    def test_equally_spaced(self):
        samples = np.linspace(0.05, 0.95, 10)
        assert ks_statistic(samples, uniform_cdf) == pytest.approx(0.05)

    def test_order_does_not_matter(self, rng):
        x = rng.random(100)
        assert ks_statistic(x, uniform_cdf) == ks_statistic(np.sort(x)[::-1], uniform_cdf)

    def test_against_scipy(self, rng):
        x = rng.normal(size=500)
        assert ks_statistic(x, stats.norm.cdf) == pytest.approx(stats.kstest(x, "norm").statistic, rel=1e-12)

    def test_matches_sorted_ecdf_gaps(self, rng):
        x = np.sort(rng.random(300))
        upper = np.arange(1, 301) / 300
        expected = max(np.max(upper - x), np.max(x - (upper - 1 / 300)))
        assert ks_statistic(x, uniform_cdf) == pytest.approx(expected, rel=1e-12)

    def test_empty(self):
        with pytest.raises(DomainError):
            ks_statistic([], uniform_cdf)


class TestWeightedKS:
    def test_unit_weights(self, rng):
        x = rng.random(200)
        assert weighted_ks_statistic(x, np.ones(200), uniform_cdf) == pytest.approx(ks_statistic(x, uniform_cdf))

    def test_weights(self):
        cdf = lambda x: np.where(x < 1.5, 0.25, 1.0)  # noqa: E731
        assert weighted_ks_statistic([2.0, 1.0], [3.0, 1.0], cdf) == pytest.approx(0.75)

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            weighted_ks_statistic([1.0, 2.0], [1.0], uniform_cdf)

    def test_zero_mass(self):
        with pytest.raises(DomainError):
            weighted_ks_statistic([1.0], [0.0], uniform_cdf)


class TestRestrict:
    def test_closed_window(self):
        values, weights = restrict(np.array([0.1, 0.5, 1.0, 2.0]), 0.5, 1.0, weights=np.array([1.0, 2.0, 3.0, 4.0]))
        assert values.tolist() == [0.5, 1.0]
        assert weights.tolist() == [2.0, 3.0]

    def test_unweighted(self):
        _, weights = restrict(np.array([0.2, 0.4]), 0.0, 1.0)
        assert weights.tolist() == [1.0, 1.0]


class TestHistogram:
    def test_conservation(self, rng):
        x = rng.normal(1.0, 1.0, 5000)
        hist = Histogram.from_samples(x, 0.0, 2.0, 20)
        assert hist.counts.sum() + hist.underflow + hist.overflow == len(x)
        assert hist.observations == len(x)

    def test_weighted_total(self, rng):
        x = rng.random(1000) * 3
        w = rng.random(1000)
        hist = Histogram.from_samples(x, 0.5, 2.5, 10, weights=w, weight_mode="length")
        assert hist.total == pytest.approx(w.sum(), rel=1e-12)

    def test_upper_edge_in_last_bin(self):
        hist = Histogram.from_samples([2.0, 0.0], 0.0, 2.0, 10)
        assert hist.counts[-1] == 1
        assert hist.counts[0] == 1
        assert hist.overflow == 0

    def test_rows(self):
        rows = list(Histogram.from_samples([0.25], 0.0, 1.0, 10).rows())
        assert len(rows) == 10
        assert rows[2] == pytest.approx((0.2, 0.3, 1.0))

    def test_merge(self):
        first = Histogram.from_samples([0.1, 0.2], 0.0, 1.0, 10)
        second = Histogram.from_samples([0.15, 1.5], 0.0, 1.0, 10)
        merged = first.merge(second)
        assert merged.counts[1] == 2
        assert merged.overflow == 1
        assert merged.observations == 4

    def test_merge_mismatch(self):
        with pytest.raises(DomainError):
            Histogram.empty(0.0, 1.0, 10).merge(Histogram.empty(0.0, 1.0, 20))

    def test_invalid(self):
        with pytest.raises(DomainError):
            Histogram.empty(1.0, 1.0, 10)
        with pytest.raises(DomainError):
            Histogram.empty(0.0, 1.0, 10, weight_mode="volume")


class TestMoments:
    def test_mean_and_error(self):
        first, second = sample_moments([1.0, 2.0, 3.0], orders=(1, 2))
        assert first.estimate == pytest.approx(2.0)
        assert first.stderr == pytest.approx(math.sqrt(2) / 3)
        assert second.estimate == pytest.approx(14 / 3)

    def test_weighted(self):
        (m,) = sample_moments([1.0, 3.0], orders=(1,), weights=[3.0, 1.0])
        assert m.estimate == pytest.approx(1.5)

    def test_targets(self):
        moments = sample_moments([1.0, 2.0], targets=lambda k: float(k))
        assert [m.target for m in moments] == [1.0, 2.0, 3.0, 4.0]

    def test_deviation(self):
        assert MomentEstimate(1, 1.2, 0.1, 1.0).deviation == pytest.approx(2.0)
        assert MomentEstimate(1, 1.2, 0.0, 1.0).deviation is None
        assert MomentEstimate(1, 1.2, 0.1).deviation is None

    def test_empty(self):
        with pytest.raises(DomainError):
            sample_moments([])
