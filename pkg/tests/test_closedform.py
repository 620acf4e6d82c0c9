"""Tests for the closed-form measures, polylogarithms and quadrature"""

import math
import warnings

import numpy as np
import pytest
from scipy import integrate, special

from lamlen.closedform import (
    M,
    M_T,
    P,
    ClosedFormDistribution,
    antiderivative_at_zero,
    antiderivative_F,
    lamination_triangle_count,
    liouville_intersection_density,
    liouville_length,
    moment_P,
    polylog,
    power_over_sinh2,
    quad_oracle,
    unit_tangent_volume,
    zeta_int,
)
from lamlen.errors import DivergenceError, DomainError, QuadratureWarning


def _scipy_integral(f, a, b):
    value, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=200)
    return value


class TestZeta:
    def test_known_values(self):
        assert zeta_int(2) == pytest.approx(math.pi**2 / 6, rel=1e-14)
        assert zeta_int(4) == pytest.approx(math.pi**4 / 90, rel=1e-14)

    @pytest.mark.parametrize("n", range(2, 13))
    def test_against_scipy(self, n):
        assert zeta_int(n) == pytest.approx(special.zeta(n), rel=1e-13)

    @pytest.mark.parametrize("n", [1, 0, 2.5])
    def test_domain(self, n):
        with pytest.raises(DomainError):
            zeta_int(n)


class TestPolylog:
    def test_at_one_is_zeta(self):
        assert polylog(3, 1.0) == zeta_int(3)

    def test_dilog_at_half(self):
        expected = math.pi**2 / 12 - math.log(2) ** 2 / 2
        assert polylog(2, 0.5) == pytest.approx(expected, rel=1e-14)

    def test_low_orders(self):
        assert polylog(0, 0.25) == pytest.approx(1 / 3)
        assert polylog(1, 0.5) == pytest.approx(math.log(2))
        assert polylog(4, 0.0) == 0.0

    def test_divergent(self):
        with pytest.raises(DivergenceError):
            polylog(1, 1.0)

    @pytest.mark.parametrize("x", [-0.1, 1.5])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            polylog(2, x)

    def test_against_mpmath(self):
        mpmath = pytest.importorskip("mpmath")
        mpmath.mp.dps = 30
        for n in range(0, 7):
            for x in (0.05, 0.3, 0.5, 0.74, 0.76, 0.9, 0.99, 0.999):
                expected = float(mpmath.polylog(n, x))
                assert polylog(n, x) == pytest.approx(expected, rel=1e-12), (n, x)


class TestAntiderivative:
    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_vanishes_at_infinity(self, n):
        assert abs(antiderivative_F(n, 60.0)) < 1e-40

    @pytest.mark.parametrize("n", [2, 3, 5])
    def test_limit_at_zero(self, n):
        assert antiderivative_F(n, 1e-10) == pytest.approx(antiderivative_at_zero(n), rel=1e-9)

    @pytest.mark.parametrize("n,x", [(2, 0.5), (3, 1.7), (4, 4.0)])
    def test_difference_is_integral(self, n, x):
        expected = _scipy_integral(lambda t: t**n / math.sinh(t) ** 2, x, x + 1.0)
        assert antiderivative_F(n, x + 1.0) - antiderivative_F(n, x) == pytest.approx(expected, rel=1e-11)

    def test_vectorized(self):
        xs = np.array([0.5, 1.0, 2.0])
        np.testing.assert_allclose(antiderivative_F(2, xs), [antiderivative_F(2, x) for x in xs], rtol=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            antiderivative_F(1, 1.0)
        with pytest.raises(DomainError):
            antiderivative_F(2, 0.0)

    def test_power_over_sinh2_branches(self):
        for x in (5e-5, 0.5, 25.0):
            assert power_over_sinh2(3, x) == pytest.approx(x**3 / math.sinh(x) ** 2, rel=1e-13)


class TestDistributions:
    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0])
    def test_P_tail_against_quadrature(self, x):
        expected = _scipy_integral(lambda t: 6 * t * t / (math.pi**2 * math.sinh(t) ** 2), x, 50.0)
        assert P.survival(x) == pytest.approx(expected, rel=1e-10)

    def test_P_is_a_probability(self):
        assert P.cdf(1e-8) == pytest.approx(0.0, abs=1e-7)
        assert P.survival(40.0) < 1e-30
        xs = np.linspace(0.01, 10, 200)
        assert np.all(np.diff(P.cdf(xs)) > 0)

    def test_M_has_infinite_mass(self):
        with pytest.raises(DomainError):
            M.cdf(1.0)
        with pytest.raises(DomainError):
            M.moment(0)

    def test_M_T_window_mass(self):
        expected = _scipy_integral(lambda t: 6 * t / math.sinh(t) ** 2, 0.5, 2.0)
        assert M_T.mass(0.5, 2.0) == pytest.approx(expected, rel=1e-10)

    def test_window_cdf(self):
        assert M.window_cdf(0.5, 0.5, 2.0) == 0.0
        assert M.window_cdf(2.0, 0.5, 2.0) == pytest.approx(1.0)
        assert M.window_cdf(3.0, 0.5, 2.0) == 1.0
        xs = np.linspace(0.5, 2.0, 50)
        assert np.all(np.diff(M.window_cdf(xs, 0.5, 2.0)) > 0)

    def test_window_moment(self):
        a, b = 0.2, 4.0
        top = _scipy_integral(lambda t: t**3 / math.sinh(t) ** 2, a, b)
        bottom = _scipy_integral(lambda t: t / math.sinh(t) ** 2, a, b)
        assert M.window_moment(2, a, b) == pytest.approx(top / bottom, rel=1e-10)

    def test_density_domain(self):
        with pytest.raises(DomainError):
            P.density(0.0)

    def test_of(self):
        assert ClosedFormDistribution.of("MT") == M_T
        with pytest.raises(DomainError):
            ClosedFormDistribution.of("Q")

    def test_M_first_moment(self):
        assert M.moment(1) == pytest.approx(1.0, rel=1e-14)


class TestMoments:
    def test_zeroth_moment_is_exact(self):
        assert moment_P(0) == 1.0

    def test_mean(self):
        assert moment_P(1) == pytest.approx(9 * zeta_int(3) / math.pi**2, rel=1e-14)
        assert abs(moment_P(1) - 1.09614) < 1e-5

    def test_mean_below_inscribed_diameter(self):
        gap = math.log(3) - moment_P(1)
        assert 0.002 < gap < 0.003

    def test_variance(self):
        assert P.variance() == pytest.approx(math.pi**2 / 5 - moment_P(1) ** 2, rel=1e-13)
        assert P.variance() == pytest.approx(0.7724, abs=1e-4)

    @pytest.mark.parametrize("n", [1, 2, 4, 7])
    def test_against_quadrature(self, n):
        expected = _scipy_integral(lambda t: 6 * t ** (n + 2) / (math.pi**2 * math.sinh(t) ** 2), 0.0, 80.0)
        assert moment_P(n) == pytest.approx(expected, rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            moment_P(-1)


class TestSurfaces:
    def test_counts(self):
        assert unit_tangent_volume(-1) == pytest.approx(4 * math.pi**2)
        assert liouville_length(-1) == pytest.approx(2 * math.pi**2)
        assert lamination_triangle_count(-2) == 4

    @pytest.mark.parametrize("chi", [-1, -2, -7])
    def test_intersection_density_is_M(self, chi):
        xs = np.linspace(0.1, 8.0, 20)
        np.testing.assert_allclose(liouville_intersection_density(chi, xs), M.density(xs), rtol=1e-14)

    def test_torus_rejected(self):
        with pytest.raises(DomainError):
            liouville_intersection_density(0, 1.0)


class TestQuadOracle:
    def test_polynomial(self):
        result = quad_oracle(lambda x: x * x, 0.0, 1.0)
        assert result.converged
        assert result.value == pytest.approx(1 / 3, rel=1e-14)

    def test_semi_infinite(self):
        assert float(quad_oracle(lambda x: math.exp(-x), 0.0, math.inf)) == pytest.approx(1.0, rel=1e-12)

    def test_non_convergence_warns(self):
        with pytest.warns(QuadratureWarning):
            result = quad_oracle(math.sqrt, 0.0, 1.0, tol=1e-15, limit=2)
        assert not result.converged
        assert result.intervals == 2

    def test_converged_does_not_warn(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            quad_oracle(math.cos, 0.0, 1.0)
