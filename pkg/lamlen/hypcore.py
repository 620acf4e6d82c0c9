"""Upper half-plane geometry: boundary points, Möbius maps, geodesics, distances"""

import math
from dataclasses import dataclass
from typing import Tuple, Union

from lamlen.errors import InvalidInputError

BOUNDARY_TOLERANCE = 1e-12

# |cos(theta)| below this is treated as a vertical direction.
_VERTICAL_EPS = 1e-15

Real = Union[int, float]


@dataclass(frozen=True)
class BoundaryPoint:
    """A point of R ∪ {∞}; infinity is a tag, never a large float"""

    value: float = 0.0
    infinite: bool = False

    def __post_init__(self):
        if self.infinite:
            object.__setattr__(self, "value", 0.0)
        elif not math.isfinite(self.value):
            raise InvalidInputError(f"Finite boundary point expected, got {self.value!r}")

    @classmethod
    def of(cls, x: Union[Real, "BoundaryPoint"]) -> "BoundaryPoint":
        """Build from a float; ±inf maps to the point at infinity"""
        if isinstance(x, BoundaryPoint):
            return x
        if math.isinf(x):
            return INFINITY
        return cls(float(x))

    def projective(self) -> Tuple[float, float]:
        """Homogeneous coordinates, (1, 0) for infinity"""
        return (1.0, 0.0) if self.infinite else (self.value, 1.0)

    def isclose(self, other: "BoundaryPoint", tol: float = BOUNDARY_TOLERANCE) -> bool:
        if self.infinite or other.infinite:
            return self.infinite == other.infinite
        return abs(self.value - other.value) <= tol

    def __float__(self) -> float:
        return math.inf if self.infinite else self.value

    def __str__(self) -> str:
        return "∞" if self.infinite else repr(self.value)


INFINITY = BoundaryPoint(infinite=True)


def _det(p: BoundaryPoint, q: BoundaryPoint) -> float:
    (xp, yp), (xq, yq) = p.projective(), q.projective()
    return xp * yq - xq * yp


@dataclass(frozen=True)
class Geodesic:
    """Oriented geodesic from p (backward endpoint) to q (forward endpoint)"""

    p: BoundaryPoint
    q: BoundaryPoint

    def __post_init__(self):
        if self.p == self.q:
            raise InvalidInputError(f"Geodesic endpoints coincide: {self.p}")

    @classmethod
    def of(cls, p: Union[Real, BoundaryPoint], q: Union[Real, BoundaryPoint]) -> "Geodesic":
        return cls(BoundaryPoint.of(p), BoundaryPoint.of(q))

    def reversed(self) -> "Geodesic":
        return Geodesic(self.q, self.p)

    def __str__(self) -> str:
        return f"({self.p}, {self.q})"


@dataclass(frozen=True)
class PointH2:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise InvalidInputError(f"Point must lie in the upper half-plane, got y={self.y}")

    def to_complex(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class UnitTangent:
    base: PointH2
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", self.theta % (2 * math.pi))


@dataclass(frozen=True)
class MobiusMap:
    """z -> (az + b)/(cz + d), stored with ad - bc = 1"""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0:
            raise InvalidInputError(f"Möbius map needs a positive determinant, got {det}")
        if det != 1.0:
            s = math.sqrt(det)
            for name in ("a", "b", "c", "d"):
                object.__setattr__(self, name, getattr(self, name) / s)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def apply(self, p: BoundaryPoint) -> BoundaryPoint:
        """Boundary action; the pole maps to ∞ and ∞ maps to a/c"""
        if p.infinite:
            return INFINITY if self.c == 0 else BoundaryPoint(self.a / self.c)
        den = self.c * p.value + self.d
        if den == 0:
            return INFINITY
        return BoundaryPoint((self.a * p.value + self.b) / den)

    def apply_point(self, z: PointH2) -> PointH2:
        w = z.to_complex()
        image = (self.a * w + self.b) / (self.c * w + self.d)
        return PointH2(image.real, image.imag)

    def apply_geodesic(self, g: Geodesic) -> Geodesic:
        return Geodesic(self.apply(g.p), self.apply(g.q))

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self ∘ other, renormalized"""
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)


IDENTITY = MobiusMap(1.0, 0.0, 0.0, 1.0)


def apply_mobius(m: MobiusMap, p: BoundaryPoint) -> BoundaryPoint:
    return m.apply(p)


def compose(m2: MobiusMap, m1: MobiusMap) -> MobiusMap:
    """The map p -> m2(m1(p))"""
    return m2.compose(m1)


@dataclass(frozen=True)
class StandardFrame:
    """Normalizing map together with the images it assigns to (v1, v2, v3)"""

    mobius: MobiusMap
    targets: Tuple[BoundaryPoint, BoundaryPoint, BoundaryPoint]

    @property
    def permuted(self) -> bool:
        return self.targets != STANDARD_TARGETS


STANDARD_TARGETS = (BoundaryPoint(0.0), BoundaryPoint(1.0), INFINITY)


def _map_to_zero_one_inf(z0: BoundaryPoint, z1: BoundaryPoint, zinf: BoundaryPoint) -> Tuple[float, ...]:
    (x0, y0), (xi, yi) = z0.projective(), zinf.projective()
    k_top, k_bottom = _det(z1, zinf), _det(z1, z0)
    return (y0 * k_top, -x0 * k_top, yi * k_bottom, -xi * k_bottom)


def mobius_to_standard_triple(v1: BoundaryPoint, v2: BoundaryPoint, v3: BoundaryPoint) -> StandardFrame:
    """Orientation-preserving map sending the triple onto the vertices {0, 1, ∞}.

    A triple ordered clockwise cannot be sent to (0, 1, ∞) by an isometry that
    preserves orientation; it is then sent to (1, 0, ∞) and the targets say so.
    """
    v1, v2, v3 = (BoundaryPoint.of(v) for v in (v1, v2, v3))
    if v1 == v2 or v2 == v3 or v1 == v3:
        raise InvalidInputError(f"Degenerate triple ({v1}, {v2}, {v3})")

    coeffs = _map_to_zero_one_inf(v1, v2, v3)
    det = coeffs[0] * coeffs[3] - coeffs[1] * coeffs[2]
    targets = STANDARD_TARGETS
    if det < 0:
        coeffs = _map_to_zero_one_inf(v2, v1, v3)
        det = -det
        targets = (BoundaryPoint(1.0), BoundaryPoint(0.0), INFINITY)
    if det == 0:
        raise InvalidInputError(f"Degenerate triple ({v1}, {v2}, {v3})")
    return StandardFrame(MobiusMap(*coeffs), targets)


def liouville_box_mass(a: Real, b: Real, c: Real, d: Real) -> float:
    """Liouville measure of the geodesics with one end in [a, b] and the other in [c, d].

    Endpoints may be ±inf. The cross ratio is at least 1 exactly when the two
    boundary arcs are disjoint, which is a Möbius-invariant condition.
    """
    pa, pb, pc, pd = (BoundaryPoint.of(x) for x in (a, b, c, d))
    if pa == pb or pc == pd:
        return 0.0
    den = _det(pa, pd) * _det(pb, pc)
    if den == 0:
        raise InvalidInputError("Box intervals share an endpoint")
    ratio = _det(pa, pc) * _det(pb, pd) / den
    if ratio < 1.0 - BOUNDARY_TOLERANCE:
        raise InvalidInputError(f"Box intervals [{pa}, {pb}] and [{pc}, {pd}] overlap")
    return max(0.0, math.log(ratio))


def hyp_distance(p: PointH2, q: PointH2) -> float:
    """arccosh(1 + |p-q|²/(2 p.y q.y)), evaluated through asinh"""
    chord = math.hypot(p.x - q.x, p.y - q.y)
    return 2.0 * math.asinh(chord / (2.0 * math.sqrt(p.y * q.y)))


def geodesic_from_tangent(v: UnitTangent) -> Geodesic:
    x0, y0 = v.base.x, v.base.y
    c, s = math.cos(v.theta), math.sin(v.theta)
    if abs(c) <= _VERTICAL_EPS:
        if s > 0:
            return Geodesic(BoundaryPoint(x0), INFINITY)
        return Geodesic(INFINITY, BoundaryPoint(x0))

    # Each offset has two algebraically equal forms; take the one without cancellation.
    forward = (1.0 + s) / c if s >= 0 else c / (1.0 - s)
    backward = (s - 1.0) / c if s <= 0 else -c / (1.0 + s)
    return Geodesic(BoundaryPoint(x0 + y0 * backward), BoundaryPoint(x0 + y0 * forward))


def tangent_at(g: Geodesic, base: PointH2) -> UnitTangent:
    """Unit tangent of g at a point lying on it, pointing toward g.q"""
    if g.q.infinite:
        return UnitTangent(base, math.pi / 2)
    if g.p.infinite:
        return UnitTangent(base, 3 * math.pi / 2)

    center = 0.5 * (g.p.value + g.q.value)
    dx, dy = base.y, -(base.x - center)
    if g.q.value < g.p.value:
        dx, dy = -dx, -dy
    return UnitTangent(base, math.atan2(dy, dx))


def point_on_geodesic(g: Geodesic, s: float = 0.0) -> PointH2:
    """Point at signed arclength s from the top of g (or from height 1 on vertical lines)"""
    if g.p.infinite or g.q.infinite:
        x = g.q.value if g.p.infinite else g.p.value
        return PointH2(x, math.exp(-s) if g.p.infinite else math.exp(s))
    center = 0.5 * (g.p.value + g.q.value)
    radius = 0.5 * abs(g.q.value - g.p.value)
    sign = 1.0 if g.q.value > g.p.value else -1.0
    return PointH2(center + sign * radius * math.tanh(s), radius / math.cosh(s))

