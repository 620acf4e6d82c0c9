"""Geodesics through the Farey tessellation.

A Farey triangle is stored as a frame g in SL(2, Z): its vertices are g(0),
g(1) and g(∞). A geodesic is carried along with its endpoints written in the
frame's coordinates (the images of the endpoints under g^{-1}), so every
triangle is already normalized to the standard triangle (0, 1, ∞). Crossing
an edge multiplies the frame by one of three fixed matrices and updates the
endpoint coordinates by one integer addition each. Endpoints are projective
integer pairs (n, d), with ∞ = (1, 0), so no decision along the walk depends
on floating-point rounding.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import FrozenSet, List, Optional, Tuple, Union

from lamlen.errors import (
    DegenerateStartError,
    DomainError,
    InvalidInputError,
    LamlenError,
    NotHyperbolicError,
)
from lamlen.hypcore import BoundaryPoint, Geodesic, geodesic_from_tangent
from lamlen.ideal_triangle import IdealTriangle
from lamlen.sampling import RandomStream, extend_endpoint, sample_tangent_in_triangle

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]
IntMatrix = Tuple[int, int, int, int]

DEFAULT_STEP_BUDGET = 10**7

INFINITE_PAIR: Pair = (1, 0)

# A float within rounding of a fraction whose denominator is at most this is
# read as that fraction.
SNAP_DENOMINATOR = 1 << 20

# Seed of the low-order digits appended to generic float endpoints.
GENERIC_TAIL_SEED = 0

# Positions returned by _locate: 1, 2, 3 are the open intervals I1, I2, I3 of
# the standard triangle; a vertex is coded by minus the index of the interval
# opposite to it, so 0 -> -3, 1 -> -1, ∞ -> -2.
_VERTEX_ZERO, _VERTEX_ONE, _VERTEX_INF = -3, -1, -2

GENERATOR_L: IntMatrix = (1, 0, 1, 1)
GENERATOR_R: IntMatrix = (1, 1, 0, 1)


def _normalize(n: int, d: int) -> Pair:
    if d < 0 or (d == 0 and n < 0):
        return -n, -d
    return n, d


def _pair_from_point(p: BoundaryPoint) -> Pair:
    if p.infinite:
        return INFINITE_PAIR
    return _normalize(*p.value.as_integer_ratio())


def _pair_to_float(pair: Pair) -> float:
    n, d = pair
    return math.inf if d == 0 else n / d


def _det(p: Pair, q: Pair) -> int:
    return p[0] * q[1] - q[0] * p[1]


def _mat_mul(m: IntMatrix, k: IntMatrix) -> IntMatrix:
    a, b, c, d = m
    e, f, g, h = k
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _mat_apply(m: IntMatrix, pair: Pair) -> Pair:
    a, b, c, d = m
    n, k = pair
    return _normalize(a * n + b * k, c * n + d * k)


@dataclass(frozen=True)
class ExactGeodesic:
    """Oriented geodesic with exact rational endpoints (backward first)"""

    backward: Pair
    forward: Pair

    def __post_init__(self):
        object.__setattr__(self, "backward", _normalize(*self.backward))
        object.__setattr__(self, "forward", _normalize(*self.forward))
        if self.backward == (0, 0) or self.forward == (0, 0):
            raise InvalidInputError("Endpoint (0, 0) is not a point of the boundary")
        if _det(self.backward, self.forward) == 0:
            raise InvalidInputError("Geodesic endpoints coincide")

    @classmethod
    def from_geodesic(cls, g: Geodesic) -> "ExactGeodesic":
        """The float endpoints taken at their exact binary values"""
        return cls(_pair_from_point(g.p), _pair_from_point(g.q))

    @classmethod
    def of(cls, u: Union[float, Fraction], v: Union[float, Fraction]) -> "ExactGeodesic":
        def pair(x):
            if isinstance(x, Fraction):
                return (x.numerator, x.denominator)
            return _pair_from_point(BoundaryPoint.of(x))

        return cls(pair(u), pair(v))

    def transform(self, m: IntMatrix) -> "ExactGeodesic":
        return ExactGeodesic(_mat_apply(m, self.backward), _mat_apply(m, self.forward))

    def to_geodesic(self) -> Geodesic:
        return Geodesic.of(_pair_to_float(self.backward), _pair_to_float(self.forward))


@dataclass(frozen=True)
class FareyTriangle:
    """Triangle of the tessellation with vertices g(0), g(1), g(∞) for g = [[a, b], [c, d]]"""

    a: int
    b: int
    c: int
    d: int

    @property
    def frame(self) -> IntMatrix:
        return (self.a, self.b, self.c, self.d)

    @property
    def vertices(self) -> Tuple[Pair, Pair, Pair]:
        a, b, c, d = self.frame
        return (_normalize(b, d), _normalize(a + b, c + d), _normalize(a, c))

    def vertex_set(self) -> FrozenSet[Pair]:
        return frozenset(self.vertices)

    def fractions(self) -> Tuple[str, str, str]:
        return tuple(f"{n}/{d}" for n, d in self.vertices)

    def is_unimodular(self) -> bool:
        return self.a * self.d - self.b * self.c == 1

    def transform(self, m: IntMatrix) -> "FareyTriangle":
        return FareyTriangle(*_mat_mul(m, self.frame))

    def to_ideal_triangle(self) -> IdealTriangle:
        return IdealTriangle.of(*(_pair_to_float(v) for v in self.vertices))


BASE_TRIANGLE = FareyTriangle(1, 0, 0, 1)


class TerminationReason(str, Enum):
    LENGTH_BUDGET = "length_budget"
    STEP_BUDGET = "step_budget"
    CUSP_EXIT = "cusp_exit"


@dataclass
class TraceResult:
    lengths: List[float]
    total_param_length: float
    terminated_reason: TerminationReason
    triangles: Optional[List[FareyTriangle]] = None
    steps: int = 0

    @property
    def segments(self) -> List[Tuple[float, Optional[FareyTriangle]]]:
        triangles = self.triangles if self.triangles is not None else [None] * len(self.lengths)
        return list(zip(self.lengths, triangles))

    @property
    def length_sum(self) -> float:
        return math.fsum(self.lengths)

    @property
    def additivity_error(self) -> float:
        if self.total_param_length == 0:
            return 0.0
        return abs(self.length_sum - self.total_param_length) / self.total_param_length


def _locate(n: int, d: int) -> int:
    if d == 0:
        return _VERTEX_INF
    if n == 0:
        return _VERTEX_ZERO
    if n < 0:
        return 1
    if n < d:
        return 2
    if n == d:
        return _VERTEX_ONE
    return 3


def _crosses(jp: int, jq: int) -> bool:
    if jp > 0 and jq > 0:
        return jp != jq
    return jp == -jq


def _segment_length(pn: int, pd: int, jp: int, qn: int, qd: int, jq: int) -> float:
    """Chord length in the standard triangle from exact endpoint coordinates"""
    if jp > jq:
        pn, pd, jp, qn, qd, jq = qn, qd, jq, pn, pd, jp
    if jp == 2:
        # z -> (z - 1)/z moves I2, I3 onto I1, I2
        pn, pd = pn - pd, pn
        qn, qd = qn - qd, qn
        jq = 2
    # u = pn/pd lies in I1; each ratio is one correctly rounded integer division
    spread = qn * pd - pn * qd
    if jq == 2:
        return 0.5 * math.log1p(spread / (pd * (qd - qn)))
    return 0.5 * math.log1p(spread / (-pn * (qn - qd)))


class _FareyWalk:
    """Mutable walker state: the current frame and both endpoints in its coordinates"""

    def __init__(self, g: ExactGeodesic, start: FareyTriangle):
        self.a, self.b, self.c, self.d = start.frame
        self.pn, self.pd = self._coords(g.backward)
        self.qn, self.qd = self._coords(g.forward)

    def _coords(self, pair: Pair) -> Pair:
        x, y = pair
        return _normalize(self.d * x - self.b * y, -self.c * x + self.a * y)

    @property
    def triangle(self) -> FareyTriangle:
        return FareyTriangle(self.a, self.b, self.c, self.d)

    def positions(self) -> Tuple[int, int]:
        return _locate(self.pn, self.pd), _locate(self.qn, self.qd)

    def length(self, jp: int, jq: int) -> float:
        return _segment_length(self.pn, self.pd, jp, self.qn, self.qd, jq)

    def edge(self, j: int) -> Tuple[Pair, Pair]:
        """World coordinates of the edge bounding interval I_j"""
        a, b, c, d = self.a, self.b, self.c, self.d
        zero, one, inf = (b, d), (a + b, c + d), (a, c)
        return {1: (inf, zero), 2: (zero, one), 3: (one, inf)}[j]

    def step(self, j: int) -> None:
        """Cross the edge bounding I_j into the neighbouring triangle"""
        if j == 1:
            self.b -= self.a
            self.d -= self.c
            self.pn += self.pd
            self.qn += self.qd
        elif j == 3:
            self.b += self.a
            self.d += self.c
            self.pn -= self.pd
            self.qn -= self.qd
        else:
            self.a += self.b
            self.c += self.d
            self.pd -= self.pn
            self.qd -= self.qn
            if self.pd < 0:
                self.pn, self.pd = -self.pn, -self.pd

    def enter(self) -> Tuple[int, int]:
        """Check the start triangle and move past an infinite cusp chord at the backward end"""
        jp, jq = self.positions()
        if jp < 0 and jq < 0:
            raise DegenerateStartError("Geodesic is an edge of the Farey tessellation")
        if not _crosses(jp, jq):
            raise InvalidInputError("Geodesic does not cross the start triangle")
        if jp < 0 and jq > 0:
            logger.debug("backward endpoint is a vertex of the start triangle; skipping its cusp chord")
            self.step(jq)
            jp, jq = self.positions()
        return jp, jq


def _edge_position(edge: Tuple[Pair, Pair], g: ExactGeodesic) -> float:
    """Signed arclength along g of its crossing with `edge`, up to a constant fixed by g"""
    w1, w2 = edge
    top = abs(_det(w1, g.backward) * _det(w2, g.backward))
    bottom = abs(_det(g.forward, w1) * _det(g.forward, w2))
    return 0.5 * (math.log(top) - math.log(bottom))


def _snap(x: float) -> Optional[Pair]:
    f = Fraction(x).limit_denominator(SNAP_DENOMINATOR)
    if float(f) == x:
        return f.numerator, f.denominator
    return None


def exact_from_floats(g: Geodesic, length_budget: Optional[float] = None) -> ExactGeodesic:
    """Exact endpoints for a geodesic given in floating point.

    An endpoint that rounds from a fraction with denominator at most
    SNAP_DENOMINATOR (0.5, 1.3, -0.3127, ...) is that fraction, hence a vertex
    of the tessellation. Any other float stands for a generic real next to it:
    given a length budget, the forward endpoint gets seeded pseudo-random digits
    below its last bit so that its Farey expansion stays generic for the whole
    trace.
    """

    def pair(p: BoundaryPoint) -> Tuple[Pair, bool]:
        if p.infinite:
            return INFINITE_PAIR, True
        snapped = _snap(p.value)
        return (snapped, True) if snapped is not None else (_pair_from_point(p), False)

    backward, _ = pair(g.p)
    forward, rational = pair(g.q)
    if length_budget is not None and not rational:
        tail = RandomStream(GENERIC_TAIL_SEED)
        forward = extend_endpoint(g.q.value, flow_precision_bits(length_budget), tail)
    return ExactGeodesic(backward, forward)


def _as_exact(g: Union[Geodesic, ExactGeodesic], length_budget: Optional[float] = None) -> ExactGeodesic:
    return g if isinstance(g, ExactGeodesic) else exact_from_floats(g, length_budget)


def locate_start(g: Union[Geodesic, ExactGeodesic], step_budget: int = DEFAULT_STEP_BUDGET) -> FareyTriangle:
    """The crossed Farey triangle nearest to the base triangle (0, 1, ∞)"""
    g = _as_exact(g)
    walk = _FareyWalk(g, BASE_TRIANGLE)
    for _ in range(step_budget):
        jp, jq = walk.positions()
        if jp < 0 and jq < 0:
            raise DegenerateStartError("Geodesic is an edge of the Farey tessellation")
        if _crosses(jp, jq):
            return walk.triangle
        walk.step(jq if jq > 0 else jp)
    raise LamlenError(f"No crossed triangle found within {step_budget} steps")


def trace(
    g: Union[Geodesic, ExactGeodesic],
    length_budget: float,
    start: Optional[FareyTriangle] = None,
    step_budget: int = DEFAULT_STEP_BUDGET,
    record_triangles: bool = False,
    check_exact: bool = False,
) -> TraceResult:
    """Walk g forward through the tessellation, one chord per triangle.

    Stops once the accumulated length reaches `length_budget`, after
    `step_budget` triangles, or when the forward endpoint turns out to be a
    vertex (the geodesic runs into a cusp).
    Float geodesics are made exact with exact_from_floats.
    """
    if not length_budget > 0:
        raise DomainError(f"length budget must be positive, got {length_budget}")
    g = _as_exact(g, length_budget)
    walk = _FareyWalk(g, start if start is not None else locate_start(g, step_budget))
    jp, jq = walk.enter()

    lengths: List[float] = []
    triangles: Optional[List[FareyTriangle]] = [] if record_triangles else None
    first_entry = walk.edge(jp) if jq > 0 else None
    last_exit = None
    total = 0.0
    reason = TerminationReason.CUSP_EXIT
    while True:
        if len(lengths) >= step_budget:
            reason = TerminationReason.STEP_BUDGET
            logger.warning("trace stopped after %d triangles at length %.6g", len(lengths), total)
            break
        jp, jq = walk.positions()
        if jq < 0:
            reason = TerminationReason.CUSP_EXIT
            break
        if check_exact and not walk.triangle.is_unimodular():
            raise LamlenError("Farey frame left SL(2, Z)")
        length = walk.length(jp, jq)
        lengths.append(length)
        if triangles is not None:
            triangles.append(walk.triangle)
        total += length
        last_exit = walk.edge(jq)
        if total >= length_budget:
            reason = TerminationReason.LENGTH_BUDGET
            break
        walk.step(jq)

    param = 0.0
    if lengths:
        param = _edge_position(last_exit, g) - _edge_position(first_entry, g)
    logger.debug("trace: %d segments, length %.6g, %s", len(lengths), param, reason.value)
    return TraceResult(lengths, param, reason, triangles, len(lengths))


@dataclass(frozen=True)
class ClosedGeodesicSpec:
    """Axis of a hyperbolic element of SL(2, Z), oriented toward its attracting fixed point"""

    matrix: IntMatrix
    axis: Geodesic
    length: float

    @property
    def trace(self) -> int:
        return self.matrix[0] + self.matrix[3]

    def exact_axis(self, bits: int) -> ExactGeodesic:
        return _exact_axis(self.matrix, bits)


def _exact_axis(matrix: IntMatrix, bits: int) -> ExactGeodesic:
    """Fixed points ((a - d) ± sqrt(t² - 4))/(2c) truncated to `bits` binary digits"""
    a, b, c, d = matrix
    t = a + d
    scale = 1 << bits
    root = math.isqrt((t * t - 4) * scale * scale)
    sign = 1 if t > 0 else -1
    attracting = ((a - d) * scale + sign * root, 2 * c * scale)
    repelling = ((a - d) * scale - sign * root, 2 * c * scale)
    return ExactGeodesic(repelling, attracting)


def closed_geodesic_from_matrix(a: int, b: int, c: int, d: int) -> ClosedGeodesicSpec:
    if any(x != int(x) for x in (a, b, c, d)):
        raise InvalidInputError("Matrix entries must be integers")
    a, b, c, d = int(a), int(b), int(c), int(d)
    if a * d - b * c != 1:
        raise InvalidInputError(f"Matrix [[{a}, {b}], [{c}, {d}]] does not have determinant 1")
    t = a + d
    if abs(t) <= 2:
        raise NotHyperbolicError(f"Trace {t} is not hyperbolic (|trace| must exceed 2)")

    length = 2.0 * math.acosh(abs(t) / 2.0)
    axis = _exact_axis((a, b, c, d), 128).to_geodesic()
    return ClosedGeodesicSpec((a, b, c, d), axis, length)


def word_matrix(word: str) -> IntMatrix:
    """Product of the parabolic generators L = [[1,0],[1,1]] and R = [[1,1],[0,1]]"""
    if not word:
        raise InvalidInputError("Empty word")
    m: IntMatrix = (1, 0, 0, 1)
    for letter in word.upper():
        if letter == "L":
            m = _mat_mul(m, GENERATOR_L)
        elif letter == "R":
            m = _mat_mul(m, GENERATOR_R)
        else:
            raise InvalidInputError(f"Invalid letter '{letter}' in word (expected L or R)")
    return m


def closed_geodesic_from_word(word: str) -> ClosedGeodesicSpec:
    return closed_geodesic_from_matrix(*word_matrix(word))


def random_positive_word(length: int, stream: RandomStream) -> str:
    """Uniform L/R word containing both letters, so its matrix is hyperbolic"""
    if length < 2:
        raise DomainError(f"A mixed word needs length >= 2, got {length}")
    while True:
        bits = stream.random_bits(length)
        word = "".join("R" if (bits >> k) & 1 else "L" for k in range(length))
        if "L" in word and "R" in word:
            return word


@dataclass
class DiscreteCurrentDistribution:
    """Chord lengths of one period of a closed geodesic, each with mass 1/l(α)"""

    lengths: List[float]
    period_length: float
    start: FareyTriangle
    matrix: IntMatrix = field(default=(1, 0, 0, 1))

    @property
    def weight(self) -> float:
        return 1.0 / self.period_length

    @property
    def total_mass(self) -> float:
        return len(self.lengths) / self.period_length

    @property
    def additivity_error(self) -> float:
        return abs(math.fsum(self.lengths) - self.period_length) / self.period_length

    def mass_in(self, lo: float, hi: float) -> float:
        return sum(1 for x in self.lengths if lo <= x <= hi) / self.period_length


def _precision_bits(length: float) -> int:
    return int(math.ceil(length / math.log(2))) + 128


def periodic_trace(
    spec: ClosedGeodesicSpec,
    start: Optional[FareyTriangle] = None,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> DiscreteCurrentDistribution:
    """Chords of one period, from `start` (default: locate_start of the axis) to its image under the matrix"""
    g = spec.exact_axis(_precision_bits(spec.length))
    start = start if start is not None else locate_start(g, step_budget)
    target = frozenset(_mat_apply(spec.matrix, v) for v in start.vertices)

    walk = _FareyWalk(g, start)
    jp, jq = walk.enter()
    if jp < 0 or jq < 0:
        raise InvalidInputError("Axis of a hyperbolic matrix passed through a tessellation vertex")

    lengths: List[float] = []
    while True:
        jp, jq = walk.positions()
        lengths.append(walk.length(jp, jq))
        walk.step(jq)
        if walk.triangle.vertex_set() == target:
            break
        if len(lengths) >= step_budget:
            raise LamlenError(f"Period not closed within {step_budget} triangles")
    return DiscreteCurrentDistribution(lengths, spec.length, start, spec.matrix)


def flow_precision_bits(length_budget: float) -> int:
    """Random binary digits needed for a trace of the given length to stay generic"""
    return int(length_budget / (2.0 * math.log(2)) * 1.05) + 64


def random_flow_geodesic(stream: RandomStream, length_budget: float) -> ExactGeodesic:
    """Geodesic through a volume-random tangent vector of the base triangle.

    The forward endpoint is extended with random low-order bits so that its
    Farey expansion stays random for the whole length budget.
    """
    while True:
        g = geodesic_from_tangent(sample_tangent_in_triangle(stream))
        if not g.q.infinite:
            break
    forward = extend_endpoint(g.q.value, flow_precision_bits(length_budget), stream)
    return ExactGeodesic(_pair_from_point(g.p), forward)
