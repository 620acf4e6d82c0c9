"""Seeded samplers for tangent vectors in the standard triangle and for
Liouville-distributed geodesics restricted to a chord-length window.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from lamlen.closedform import M_T
from lamlen.errors import DomainError, InvalidConfigError, InvalidInputError
from lamlen.hypcore import Geodesic, PointH2, UnitTangent, geodesic_from_tangent
from lamlen.ideal_triangle import (
    Sector,
    SelfMap,
    chord_length_standard,
    chord_lengths_standard,
    symmetry_onto,
)

logger = logging.getLogger(__name__)

WINDOW_SCHEMES = ("log", "uniform", "inverse")

_BATCH = 1 << 16


@dataclass
class RandomStream:
    """Philox counter-based generator keyed by (seed, stream_index).

    Distinct stream indices give statistically independent substreams, and the
    same pair always reproduces the same sequence.
    """

    seed: int
    stream_index: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_index,))
        self.rng = np.random.Generator(np.random.Philox(seq))

    def uniform(self, size=None):
        """Uniform draws on (0, 1]"""
        u = self.rng.random(size)
        return 1.0 - u

    def random_bits(self, k: int) -> int:
        """A uniform integer in [0, 2^k)"""
        if k <= 0:
            return 0
        raw = int.from_bytes(self.rng.bytes((k + 7) // 8), "little")
        return raw >> (8 * ((k + 7) // 8) - k)


@dataclass(frozen=True)
class LiouvilleWindowSample:
    geodesic: Geodesic
    sector: Sector
    chord: float


@dataclass
class WindowBatch:
    """Accepted window samples with the sampler's bookkeeping"""

    sector: Sector
    u: np.ndarray
    v: np.ndarray
    chords: np.ndarray
    proposals: int = 0
    vertex_rejections: int = 0

    @property
    def acceptance_rate(self) -> float:
        return len(self.chords) / self.proposals if self.proposals else 0.0


@dataclass(frozen=True)
class WindowMass:
    """Monte Carlo estimate of the Liouville mass of L^{-1}([a, b]) in one sector"""

    sector: Sector
    estimate: float
    stderr: float
    proposals: int
    vertex_rejections: int


def in_standard_triangle(x, y):
    return (x > 0) & (x < 1) & ((x - 0.5) ** 2 + y**2 > 0.25)


def _draw_tangents(s: RandomStream, n: int):
    u1, u2, u3 = s.uniform(n), s.uniform(n), s.uniform(n)
    x = np.sin(0.5 * math.pi * u1) ** 2
    y = np.sqrt(x * (1.0 - x)) / u2
    return x, y, 2.0 * math.pi * u3


def sample_tangents(s: RandomStream, n: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """n tangent vectors distributed by area × angle on the standard triangle.

    The base point x follows the arcsine law (the area above the arc at x is
    1/sqrt(x - x²)); given x, 1/y is uniform below 1/c(x) with c(x) the arc
    height; the angle is uniform.
    """
    x, y, theta = _draw_tangents(s, n)
    bad = np.flatnonzero(~in_standard_triangle(x, y))
    while len(bad):
        logger.debug("redrawing %d tangent samples on the triangle boundary", len(bad))
        x[bad], y[bad], theta[bad] = _draw_tangents(s, len(bad))
        bad = bad[~in_standard_triangle(x[bad], y[bad])]
    return x, y, theta


def sample_tangent_in_triangle(s: RandomStream) -> UnitTangent:
    while True:
        x, y, theta = (float(t[0]) for t in sample_tangents(s, 1))
        if in_standard_triangle(x, y):
            return UnitTangent(PointH2(x, y), theta)


def chord_of_tangent(v: UnitTangent) -> float:
    if not in_standard_triangle(v.base.x, v.base.y):
        raise InvalidInputError(f"Base point ({v.base.x}, {v.base.y}) is not inside the standard triangle")
    return chord_length_standard(geodesic_from_tangent(v))


def tangent_endpoints(x: np.ndarray, y: np.ndarray, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized geodesic_from_tangent; ∞ is returned as +inf"""
    c, s = np.cos(theta), np.sin(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        forward = np.where(s >= 0, (1.0 + s) / c, c / (1.0 - s))
        backward = np.where(s <= 0, (s - 1.0) / c, -c / (1.0 + s))
    p, q = x + y * backward, x + y * forward
    vertical = np.abs(c) <= 1e-15
    p = np.where(vertical, np.where(s > 0, x, np.inf), p)
    q = np.where(vertical, np.where(s > 0, np.inf, x), q)
    return p, q


def chords_of_tangents(x: np.ndarray, y: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return chord_lengths_standard(*tangent_endpoints(x, y, theta))


def window_epsilon(a: float) -> float:
    """(e^{2a} - 1)/(e^{2a} + 1): the corner of I1×I2 excluded by L ≥ a"""
    return math.tanh(a)


def _check_window(a: float, b: float) -> None:
    if not (0 < a < b < math.inf):
        raise DomainError(f"Window needs 0 < a < b < inf, got [{a}, {b}]")


def _check_scheme(scheme: str) -> None:
    if scheme not in WINDOW_SCHEMES:
        raise InvalidConfigError(f"Unknown window scheme '{scheme}' (expected one of {', '.join(WINDOW_SCHEMES)})")


def _propose(a: float, b: float, scheme: str, s: RandomStream, n: int):
    """Proposals (u, v) in I1×I2 with the Liouville weight divided by its bound.

    "uniform" draws (u, v) uniformly on [1 - e^{2b}, 0] × [0, 1 - e^{-2b}];
    "log" draws (ln(1-u), ln(1-v)) uniformly on [0, 2b] × [-2b, 0], where the
    weight becomes 1/(4 sinh²L). Both boxes contain L^{-1}([a, b]) ∩ I1×I2.
    Returns u, v, the weight w, its upper bound w_max and the box area.
    """
    r1, r2 = s.uniform(n), s.uniform(n)
    if scheme == "uniform":
        u_lo, v_hi = -math.expm1(2 * b), -math.expm1(-2 * b)
        u, v = u_lo * r1, v_hi * r2
        area = -u_lo * v_hi
        w = 1.0 / (v - u) ** 2
        w_max = 1.0 / (math.exp(-2 * b) * math.expm1(2 * a)) ** 2
    else:
        alpha, beta = 2 * b * r1, -2 * b * r2
        u, v = -np.expm1(alpha), -np.expm1(beta)
        area = 4 * b * b
        w = 0.25 / np.sinh(0.5 * (alpha - beta)) ** 2
        w_max = 0.25 / math.sinh(a) ** 2
    return u, v, w, w_max, area


def _inverse_window(a: float, b: float, s: RandomStream, n: int):
    """Exact draws: L by bisection on the normalized tail of x/sinh²x, then ln(1-u) uniform on [0, 2L]"""
    target = s.uniform(n)
    s_a, s_b = M_T.survival(a), M_T.survival(b)
    lo, hi = np.full(n, a), np.full(n, b)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = (s_a - M_T.survival(mid)) / (s_a - s_b) < target
        lo, hi = np.where(below, mid, lo), np.where(below, hi, mid)
    chord = 0.5 * (lo + hi)
    alpha = 2.0 * chord * s.uniform(n)
    return -np.expm1(alpha), -np.expm1(alpha - 2.0 * chord)


def _map_to_sector(sector: Sector, u: np.ndarray, v: np.ndarray):
    sym: SelfMap = symmetry_onto(sector)
    return sym, sym.apply_array(u), sym.apply_array(v)


def sample_liouville_windows(
    a: float, b: float, sector: Sector, s: RandomStream, n: int, scheme: str = "log"
) -> WindowBatch:
    """n geodesics of sector `sector` distributed by the Liouville measure restricted to L ∈ [a, b]"""
    _check_window(a, b)
    _check_scheme(scheme)
    batch = WindowBatch(sector, np.empty(0), np.empty(0), np.empty(0))
    us, vs, chords = [], [], []
    accepted = 0
    while accepted < n:
        if scheme == "inverse":
            want = n - accepted
            u, v = _inverse_window(a, b, s, want)
            batch.proposals += want
        else:
            u, v, w, w_max, _ = _propose(a, b, scheme, s, _BATCH)
            batch.proposals += _BATCH
            keep = s.uniform(_BATCH) * w_max <= w
            u, v = u[keep], v[keep]

        sym, pu, pv = _map_to_sector(sector, u, v)
        hit = ~np.isfinite(pu) | ~np.isfinite(pv) | (pu == 0) | (pu == 1) | (pv == 0) | (pv == 1) | (u == 0) | (v == 0)
        batch.vertex_rejections += int(hit.sum())
        pu, pv = pu[~hit], pv[~hit]
        length = chord_lengths_standard(pu, pv)
        ok = (length >= a) & (length <= b)
        take = np.flatnonzero(ok)[: n - accepted]
        us.append(pu[take])
        vs.append(pv[take])
        chords.append(length[take])
        accepted += len(take)

    batch.u, batch.v, batch.chords = np.concatenate(us), np.concatenate(vs), np.concatenate(chords)
    if batch.vertex_rejections:
        logger.debug("window sampler rejected %d vertex hits in sector %s", batch.vertex_rejections, sector)
    return batch


def sample_liouville_window(
    a: float, b: float, sector: Sector, s: RandomStream, scheme: str = "log"
) -> LiouvilleWindowSample:
    batch = sample_liouville_windows(a, b, sector, s, 1, scheme)
    g = Geodesic.of(float(batch.u[0]), float(batch.v[0]))
    return LiouvilleWindowSample(g, sector, float(batch.chords[0]))


def window_mass(
    a: float, b: float, sector: Sector, s: RandomStream, proposals: int, scheme: str = "log"
) -> WindowMass:
    """Importance estimate of μ(L^{-1}([a, b]) ∩ sector).

    Proposals are drawn in the sector-(1,2) box and pushed into the target
    sector; the Liouville density du dv/(u - v)² and the chord length are
    evaluated in the target sector's own coordinates.
    """
    _check_window(a, b)
    _check_scheme(scheme)
    if scheme == "inverse":
        raise InvalidConfigError("The inverse scheme draws exact samples and cannot estimate masses")

    sums, squares, done, rejected = 0.0, 0.0, 0, 0
    while done < proposals:
        n = min(_BATCH, proposals - done)
        u, v, _, _, area = _propose(a, b, scheme, s, n)
        sym, pu, pv = _map_to_sector(sector, u, v)
        # Density of the proposal in (u, v): 1 for "uniform", 1/((1-u)(1-v)) for "log".
        jac = np.ones(n) if scheme == "uniform" else (1.0 - u) * (1.0 - v)
        hit = ~np.isfinite(pu) | ~np.isfinite(pv) | (pu == 0) | (pu == 1) | (pv == 0) | (pv == 1)
        rejected += int(hit.sum())
        with np.errstate(divide="ignore", invalid="ignore"):
            weight = area * jac * sym.derivative(u) * sym.derivative(v) / (pu - pv) ** 2
        length = np.zeros(n)
        length[~hit] = chord_lengths_standard(pu[~hit], pv[~hit])
        values = np.where(~hit & (length >= a) & (length <= b), weight, 0.0)
        sums += float(values.sum())
        squares += float((values * values).sum())
        done += n

    mean = sums / proposals
    var = max(squares / proposals - mean * mean, 0.0)
    return WindowMass(sector, mean, math.sqrt(var / proposals), proposals, rejected)


def extend_endpoint(x: float, extra_bits: int, s: RandomStream) -> Tuple[int, int]:
    """Exact dyadic x with `extra_bits` random binary digits appended below its last bit.

    Returns a projective integer pair (numerator, denominator) with a positive
    denominator.
    """
    if not math.isfinite(x):
        raise InvalidInputError("Only finite endpoints can be extended")
    mantissa, exponent = math.frexp(x)
    num = int(mantissa * (1 << 53))
    shift = exponent - 53 - extra_bits
    num = (num << extra_bits) + (s.random_bits(extra_bits) if num >= 0 else -s.random_bits(extra_bits))
    if shift >= 0:
        return num << shift, 1
    return num, 1 << -shift
