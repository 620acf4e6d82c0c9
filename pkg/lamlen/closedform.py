"""Closed forms for the intersection-length measures M, M_T and P.

    dM   = 6x dx / (π² sinh²x)
    dM_T = 6x dx / sinh²x          (one ideal triangle, Liouville measure)
    dP   = 6x² dx / (π² sinh²x)    (one ideal triangle, normalized volume)

Everything is expressed through the polylogarithms li_n(x) = Σ_{k≥1} x^k/k^n
and the antiderivative

    F(n, x) = -Σ_{j=0..n} n!/(n-j)! · 2^{1-j} · x^{n-j} · li_j(e^{-2x}),

which satisfies F'(n, x) = x^n / sinh²x and F(n, ∞) = 0.
"""

import heapq
import logging
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from functools import cache
from typing import Callable, Union

import numpy as np
from scipy.special import bernoulli

from lamlen.errors import DivergenceError, DomainError, QuadratureWarning

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

PI2 = math.pi**2

# Below this, sinh²x is replaced by its Taylor polynomial.
SMALL_X = 1e-4
# Above this, 1/sinh²x is evaluated as 4e^{-2x}/(1 - e^{-2x})².
LARGE_X = 20.0

# Direct summation of the polylog series is used up to this argument.
_DIRECT_SERIES_LIMIT = 0.75
_DIRECT_TERMS = 160
_LOG_SERIES_TERMS = 60
_ZETA_TERMS = 30


def _as_output(x, values):
    return float(values) if np.ndim(x) == 0 else values


@cache
def zeta_int(n: int) -> float:
    """ζ(n) for integer n ≥ 2 via the accelerated alternating eta series"""
    if n != int(n) or n < 2:
        raise DomainError(f"zeta_int needs an integer n >= 2, got {n}")
    n = int(n)
    d = (3.0 + math.sqrt(8.0)) ** _ZETA_TERMS
    d = 0.5 * (d + 1.0 / d)
    b, c, s = -1.0, -d, 0.0
    for k in range(_ZETA_TERMS):
        c = b - c
        s += c / (k + 1) ** n
        b *= (k + _ZETA_TERMS) * (k - _ZETA_TERMS) / ((k + 0.5) * (k + 1))
    eta = s / d
    return eta / (1.0 - 2.0 ** (1 - n))


@cache
def _zeta_nonpositive(m: int) -> float:
    """ζ(-m) for m ≥ 0"""
    if m == 0:
        return -0.5
    return float(-bernoulli(m + 1)[m + 1] / (m + 1))


def _zeta_any(s: int) -> float:
    return zeta_int(s) if s >= 2 else _zeta_nonpositive(-s)


def _li_direct(n: int, x: np.ndarray) -> np.ndarray:
    total = np.zeros_like(x)
    power = np.ones_like(x)
    for k in range(1, _DIRECT_TERMS + 1):
        power = power * x
        total += power / float(k) ** n
    return total


def _li_log_series(n: int, mu: np.ndarray) -> np.ndarray:
    """li_n(e^mu) for -0.3 < mu < 0, n ≥ 2, expanded in powers of mu"""
    harmonic = sum(1.0 / k for k in range(1, n))
    lead = mu ** (n - 1) / math.factorial(n - 1) * (harmonic - np.log(-mu))
    total = np.zeros_like(mu)
    power = np.ones_like(mu)
    for k in range(_LOG_SERIES_TERMS):
        if k != n - 1:
            total += _zeta_any(n - k) * power
        power = power * mu / (k + 1)
    return lead + total


def _li_exp(n: int, mu: ArrayLike) -> np.ndarray:
    """li_n(e^mu) for mu ≤ 0, taking mu directly to avoid rounding e^mu near 1"""
    mu = np.asarray(mu, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if n == 0:
            return 1.0 / np.expm1(-mu)
        if n == 1:
            return -np.log(-np.expm1(mu))
        out = np.empty_like(mu)
        x = np.exp(mu)
        direct = x <= _DIRECT_SERIES_LIMIT
        at_one = mu == 0
        near = ~direct & ~at_one
        out[direct] = _li_direct(n, x[direct])
        out[near] = _li_log_series(n, mu[near])
        out[at_one] = zeta_int(n)
        return out


def polylog(n: int, x: float) -> float:
    """li_n(x) = Σ_{k≥1} x^k / k^n on [0, 1]"""
    if n != int(n) or n < 0:
        raise DomainError(f"polylog order must be a nonnegative integer, got {n}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"polylog argument must lie in [0, 1], got {x}")
    n = int(n)
    if x == 1.0:
        if n <= 1:
            raise DivergenceError(f"li_{n}(1) diverges")
        return zeta_int(n)
    if x == 0.0:
        return 0.0
    if n == 0:
        return x / (1.0 - x)
    if n == 1:
        return -math.log1p(-x)
    return float(_li_exp(n, math.log(x)))


def _antiderivative(n: int, x: ArrayLike) -> np.ndarray:
    """F(n, x) for any n ≥ 0; n = 1 gives the tail of M, n = 2 the tail of P"""
    x = np.asarray(x, dtype=float)
    mu = -2.0 * x
    total = np.zeros_like(x)
    for j in range(n + 1):
        coeff = math.factorial(n) / math.factorial(n - j) * 2.0 ** (1 - j)
        total += coeff * x ** (n - j) * _li_exp(j, mu)
    return -total


def antiderivative_F(n: int, x: ArrayLike) -> ArrayLike:
    """F(n, x) with F' = x^n / sinh²x and F(n, ∞) = 0"""
    if n != int(n) or n < 2:
        raise DomainError(f"antiderivative_F needs an integer n >= 2, got {n}")
    if np.any(np.asarray(x) <= 0):
        raise DomainError("antiderivative_F needs x > 0")
    return _as_output(x, _antiderivative(int(n), x))


def antiderivative_at_zero(n: int) -> float:
    """lim_{x→0+} F(n, x) = -n!/2^{n-1} ζ(n)"""
    return -math.factorial(n) / 2.0 ** (n - 1) * zeta_int(n)


def power_over_sinh2(n: int, x: ArrayLike) -> ArrayLike:
    """x^n / sinh²x without cancellation near 0 or overflow for large x"""
    xa = np.asarray(x, dtype=float)
    out = np.empty_like(xa)
    small = xa < SMALL_X
    large = xa > LARGE_X
    mid = ~small & ~large

    xs = xa[small]
    x2 = xs * xs
    out[small] = xs ** (n - 2) / (1.0 + x2 / 3.0 + 2.0 * x2 * x2 / 45.0)
    xm = xa[mid]
    out[mid] = xm**n / np.sinh(xm) ** 2
    xl = xa[large]
    q = np.exp(-2.0 * xl)
    out[large] = 4.0 * xl**n * q / (1.0 - q) ** 2
    return _as_output(x, out)


class DistributionKind(str, Enum):
    M = "M"
    M_T = "MT"
    P = "P"


# Scale of each density relative to x^k / sinh²x, and the power k.
_DENSITY_SHAPE = {
    DistributionKind.M: (6.0 / PI2, 1),
    DistributionKind.M_T: (6.0, 1),
    DistributionKind.P: (6.0 / PI2, 2),
}


@dataclass(frozen=True)
class ClosedFormDistribution:
    """Density, tail and moments of M, M_T or P"""

    kind: DistributionKind

    @classmethod
    def of(cls, kind: Union[str, DistributionKind]) -> "ClosedFormDistribution":
        try:
            return cls(DistributionKind(kind))
        except ValueError:
            raise DomainError(f"Unknown distribution '{kind}' (expected M, MT or P)") from None

    @property
    def scale(self) -> float:
        return _DENSITY_SHAPE[self.kind][0]

    @property
    def power(self) -> int:
        return _DENSITY_SHAPE[self.kind][1]

    @property
    def is_probability(self) -> bool:
        return self.kind is DistributionKind.P

    def density(self, x: ArrayLike) -> ArrayLike:
        if np.any(np.asarray(x) <= 0):
            raise DomainError(f"density of {self.kind.value} needs x > 0")
        return self.scale * power_over_sinh2(self.power, x)

    def survival(self, x: ArrayLike) -> ArrayLike:
        """Mass of [x, ∞)"""
        if np.any(np.asarray(x) <= 0):
            raise DomainError(f"survival of {self.kind.value} needs x > 0")
        return _as_output(x, -self.scale * _antiderivative(self.power, x))

    def cdf(self, x: ArrayLike) -> ArrayLike:
        if not self.is_probability:
            raise DomainError(f"{self.kind.value} has infinite total mass; use window_cdf")
        return 1.0 - self.survival(x)

    def mass(self, a: float, b: float) -> float:
        """Mass of [a, b]"""
        if not 0 < a < b:
            raise DomainError(f"mass needs 0 < a < b, got [{a}, {b}]")
        return float(self.survival(a) - self.survival(b))

    def window_cdf(self, x: ArrayLike, a: float, b: float) -> ArrayLike:
        """CDF of the measure restricted to [a, b] and normalized"""
        if not 0 < a < b:
            raise DomainError(f"window needs 0 < a < b, got [{a}, {b}]")
        xa = np.clip(np.asarray(x, dtype=float), a, b)
        s_a = self.survival(a)
        values = (s_a - self.survival(xa)) / (s_a - self.survival(b))
        return _as_output(x, np.clip(values, 0.0, 1.0))

    def moment(self, n: int) -> float:
        """∫ x^n d(measure); finite for P when n ≥ 0, for M and M_T when n ≥ 1"""
        if self.kind is DistributionKind.P:
            return moment_P(n)
        if n < 1:
            raise DomainError(f"{self.kind.value} has infinite total mass")
        k = n + self.power
        return self.scale * math.factorial(k) / 2.0 ** (k - 1) * zeta_int(k)

    def window_moment(self, n: int, a: float, b: float) -> float:
        """n-th moment of the measure restricted to [a, b] and normalized"""
        if not 0 < a < b:
            raise DomainError(f"window needs 0 < a < b, got [{a}, {b}]")
        k = self.power
        inside = _antiderivative(k + n, b) - _antiderivative(k + n, a)
        return float(inside / (_antiderivative(k, b) - _antiderivative(k, a)))

    def variance(self) -> float:
        return self.moment(2) - self.moment(1) ** 2


M = ClosedFormDistribution(DistributionKind.M)
M_T = ClosedFormDistribution(DistributionKind.M_T)
P = ClosedFormDistribution(DistributionKind.P)


def density(d: ClosedFormDistribution, x: ArrayLike) -> ArrayLike:
    return d.density(x)


def survival(d: ClosedFormDistribution, x: ArrayLike) -> ArrayLike:
    return d.survival(x)


def moment_P(n: int) -> float:
    """E_P(x^n) = 3(n+2)!/(2^n π²) ζ(n+2)"""
    if n != int(n) or n < 0:
        raise DomainError(f"moment order must be a nonnegative integer, got {n}")
    n = int(n)
    if n == 0:
        return 1.0
    return 3.0 * math.factorial(n + 2) / (2.0**n * PI2) * zeta_int(n + 2)


# Surfaces: a closed hyperbolic surface of Euler characteristic chi has area
# 2π|chi|, and a maximal lamination cuts it into 2|chi| ideal triangles.


def unit_tangent_volume(chi: int) -> float:
    return 4.0 * PI2 * abs(chi)


def liouville_length(chi: int) -> float:
    """Liouville length l(μ) of the surface"""
    return 2.0 * PI2 * abs(chi)


def lamination_triangle_count(chi: int) -> int:
    return 2 * abs(chi)


def liouville_intersection_density(chi: int, x: ArrayLike) -> ArrayLike:
    """Density of D_λ(μ): triangle pushforwards averaged by l(μ); equals the M density"""
    if chi == 0:
        raise DomainError("A hyperbolic surface has nonzero Euler characteristic")
    return lamination_triangle_count(chi) * M_T.density(x) / liouville_length(chi)


# Gauss-Kronrod 7/15 rule (QUADPACK qk15 nodes and weights).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes.
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5]] = _WG[:3]
_GAUSS[[13, 11, 9]] = _WG[:3]
_GAUSS[7] = _WG[3]


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool
    intervals: int

    def __float__(self) -> float:
        return self.value


def _gk15(f: Callable[[float], float], lo: float, hi: float):
    half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
    fx = np.array([f(mid + half * t) for t in _NODES], dtype=float)
    kronrod = half * float(fx @ _KRONROD)
    gauss = half * float(fx @ _GAUSS)
    return kronrod, abs(kronrod - gauss)


def quad_oracle(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    limit: int = 2000,
) -> QuadResult:
    """Adaptive Gauss-Kronrod quadrature of f over [a, b]; b may be +inf.

    A semi-infinite range is mapped onto (0, 1] with x = a - ln t. When the
    interval limit is reached the best estimate is returned with
    converged=False and a QuadratureWarning.
    """
    if math.isinf(b):
        base = a

        def g(t: float) -> float:
            return f(base - math.log(t)) / t

        integrand, lo, hi = g, 0.0, 1.0
    else:
        integrand, lo, hi = f, a, b

    value, error = _gk15(integrand, lo, hi)
    heap = [(-error, lo, hi, value)]
    total, total_error = value, error
    while total_error > max(tol, tol * abs(total)) and len(heap) < limit:
        _, x0, x1, v = heapq.heappop(heap)
        xm = 0.5 * (x0 + x1)
        left, left_err = _gk15(integrand, x0, xm)
        right, right_err = _gk15(integrand, xm, x1)
        heapq.heappush(heap, (-left_err, x0, xm, left))
        heapq.heappush(heap, (-right_err, xm, x1, right))
        total = math.fsum(item[3] for item in heap)
        total_error = math.fsum(-item[0] for item in heap)

    converged = total_error <= max(tol, tol * abs(total))
    if not converged:
        message = f"quadrature stopped at {len(heap)} intervals with error estimate {total_error:.3g}"
        logger.warning(message)
        warnings.warn(message, QuadratureWarning, stacklevel=2)
    return QuadResult(total, total_error, converged, len(heap))
