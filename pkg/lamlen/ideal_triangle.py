"""Chord lengths of geodesics inside ideal triangles.

The standard triangle T has vertices 0, 1, ∞ and cuts the boundary into
I1 = (-∞, 0), I2 = (0, 1) and I3 = (1, ∞). A geodesic crosses T exactly when
its endpoints lie in two different intervals; the length of g ∩ T is then
given in closed form on the sectors I1×I2 and I1×I3, and the remaining
sectors are reduced to those by boundary symmetries of T.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np

from lamlen.errors import InvalidInputError
from lamlen.hypcore import (
    BOUNDARY_TOLERANCE,
    INFINITY,
    BoundaryPoint,
    Geodesic,
    PointH2,
    hyp_distance,
    mobius_to_standard_triple,
)

# Diameter of the disk inscribed in an ideal triangle.
INSCRIBED_DISK_DIAMETER = math.log(3.0)


@dataclass(frozen=True)
class IdealTriangle:
    v1: BoundaryPoint
    v2: BoundaryPoint
    v3: BoundaryPoint

    def __post_init__(self):
        if self.v1 == self.v2 or self.v2 == self.v3 or self.v1 == self.v3:
            raise InvalidInputError(f"Ideal triangle vertices must be distinct: {self.vertices}")

    @classmethod
    def of(cls, v1, v2, v3) -> "IdealTriangle":
        return cls(BoundaryPoint.of(v1), BoundaryPoint.of(v2), BoundaryPoint.of(v3))

    @property
    def vertices(self) -> Tuple[BoundaryPoint, BoundaryPoint, BoundaryPoint]:
        return (self.v1, self.v2, self.v3)


STANDARD_TRIANGLE = IdealTriangle(BoundaryPoint(0.0), BoundaryPoint(1.0), INFINITY)


@dataclass(frozen=True)
class Sector:
    """The product I_i × I_j of two boundary intervals of T"""

    i: int
    j: int

    def __post_init__(self):
        if self.i not in (1, 2, 3) or self.j not in (1, 2, 3) or self.i == self.j:
            raise InvalidInputError(f"Invalid sector ({self.i}, {self.j})")

    def __str__(self) -> str:
        return f"({self.i},{self.j})"


ALL_SECTORS = tuple(Sector(i, j) for i in (1, 2, 3) for j in (1, 2, 3) if i != j)


class ChordKind(Enum):
    CROSSES = "crosses"
    MISSES = "misses"
    VERTEX_HIT = "vertex_hit"


@dataclass(frozen=True)
class ChordClassification:
    kind: ChordKind
    sector: Optional[Sector] = None


class SelfMap(NamedTuple):
    """Boundary symmetry of T as z -> (az + b)/(cz + d); det is ±1.

    `perm` sends the index of an interval to the index of its image.
    """

    name: str
    a: int
    b: int
    c: int
    d: int
    perm: Dict[int, int]

    def __call__(self, x: float) -> float:
        if math.isinf(x):
            return math.inf if self.c == 0 else self.a / self.c
        den = self.c * x + self.d
        if den == 0:
            return math.inf
        return (self.a * x + self.b) / den

    def apply_array(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.a * x + self.b) / (self.c * x + self.d)

    def derivative(self, x: np.ndarray) -> np.ndarray:
        """|s'(x)| = 1/(cx + d)²"""
        with np.errstate(divide="ignore"):
            return 1.0 / (self.c * x + self.d) ** 2

    def apply_geodesic(self, g: Geodesic) -> Geodesic:
        return Geodesic.of(self(float(g.p)), self(float(g.q)))

    def image(self, sector: Sector) -> Sector:
        return Sector(self.perm[sector.i], self.perm[sector.j])


TRIANGLE_SYMMETRIES = (
    SelfMap("identity", 1, 0, 0, 1, {1: 1, 2: 2, 3: 3}),
    SelfMap("rotate", 0, 1, -1, 1, {1: 2, 2: 3, 3: 1}),
    SelfMap("rotate_inverse", 1, -1, 1, 0, {1: 3, 2: 1, 3: 2}),
    SelfMap("reflect_half", -1, 1, 0, 1, {1: 3, 2: 2, 3: 1}),
    SelfMap("invert", 0, 1, 1, 0, {1: 1, 2: 3, 3: 2}),
    SelfMap("reflect_zero", 1, 0, 1, -1, {1: 2, 2: 1, 3: 3}),
)

_BASE_SECTOR = Sector(1, 2)


def symmetry_onto(sector: Sector) -> SelfMap:
    """The symmetry carrying sector (1,2) onto `sector`"""
    for s in TRIANGLE_SYMMETRIES:
        if s.image(_BASE_SECTOR) == sector:
            return s
    raise InvalidInputError(f"No symmetry reaches sector {sector}")


# Vertex -> index of the boundary interval opposite to it.
_OPPOSITE_INTERVAL = {0.0: 3, 1.0: 1, math.inf: 2}


def _vertex(p: BoundaryPoint, tol: float) -> Optional[float]:
    if p.infinite:
        return math.inf
    if abs(p.value) <= tol:
        return 0.0
    if abs(p.value - 1.0) <= tol:
        return 1.0
    return None


def interval_index(x: float) -> int:
    """Index of the open interval of ∂H² \\ {0, 1, ∞} containing x"""
    if x < 0:
        return 1
    return 2 if x < 1 else 3


def classify(g: Geodesic, tol: float = BOUNDARY_TOLERANCE) -> ChordClassification:
    if _vertex(g.p, tol) is not None or _vertex(g.q, tol) is not None:
        return ChordClassification(ChordKind.VERTEX_HIT)
    i, j = interval_index(g.p.value), interval_index(g.q.value)
    if i == j:
        return ChordClassification(ChordKind.MISSES)
    return ChordClassification(ChordKind.CROSSES, Sector(i, j))


def length_12(u, v):
    """Chord length for u in I1, v in I2"""
    return 0.5 * np.log1p((v - u) / (1.0 - v))


def length_13(u, v):
    """Chord length for u in I1, v in I3"""
    return 0.5 * np.log1p((v - u) / ((-u) * (v - 1.0)))


def _crossing_length(u: float, v: float, i: int, j: int) -> float:
    if i > j:
        u, v, i, j = v, u, j, i
    if (i, j) == (1, 2):
        return float(length_12(u, v))
    if (i, j) == (1, 3):
        return float(length_13(u, v))
    # (2, 3): z -> (z - 1)/z carries I2 onto I1 and I3 onto I2
    return float(length_12(1.0 - 1.0 / u, 1.0 - 1.0 / v))


def _vertex_hit_length(g: Geodesic, tol: float) -> float:
    wp, wq = _vertex(g.p, tol), _vertex(g.q, tol)
    if wp is not None and wq is not None:
        return 0.0
    vertex, other = (wp, g.q) if wp is not None else (wq, g.p)
    return math.inf if interval_index(other.value) == _OPPOSITE_INTERVAL[vertex] else 0.0


def chord_length_standard(g: Geodesic, tol: float = BOUNDARY_TOLERANCE) -> float:
    """Length of g ∩ T for the standard triangle; 0 if g misses T, possibly ∞"""
    cls = classify(g, tol)
    if cls.kind is ChordKind.MISSES:
        return 0.0
    if cls.kind is ChordKind.VERTEX_HIT:
        return _vertex_hit_length(g, tol)
    return _crossing_length(g.p.value, g.q.value, cls.sector.i, cls.sector.j)


def chord_length(g: Geodesic, triangle: IdealTriangle, tol: float = BOUNDARY_TOLERANCE) -> float:
    frame = mobius_to_standard_triple(*triangle.vertices)
    return chord_length_standard(frame.mobius.apply_geodesic(g), tol)


def _interval_array(x: np.ndarray) -> np.ndarray:
    return np.where(x < 0, 1, np.where(x < 1, 2, 3))


def chord_lengths_standard(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Vectorized chord_length_standard; ±inf entries stand for ∞"""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    swap = _interval_array(p) > _interval_array(q)
    u, v = np.where(swap, q, p), np.where(swap, p, q)
    iu, iv = _interval_array(u), _interval_array(v)

    hits = np.isinf(u) | np.isinf(v) | (u == 0) | (u == 1) | (v == 0) | (v == 1)
    out = np.zeros(u.shape, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        m = (iu == 1) & (iv == 2) & ~hits
        out[m] = length_12(u[m], v[m])
        m = (iu == 1) & (iv == 3) & ~hits
        out[m] = length_13(u[m], v[m])
        m = (iu == 2) & (iv == 3) & ~hits
        out[m] = length_12(1.0 - 1.0 / u[m], 1.0 - 1.0 / v[m])

    for k in np.flatnonzero(hits):
        out[k] = _vertex_hit_length(Geodesic.of(p[k], q[k]), 0.0)
    return out


@dataclass(frozen=True)
class OracleChord:
    """Where a geodesic meets the boundary of a triangle, ordered along the geodesic"""

    points: Optional[Tuple[PointH2, PointH2]]
    tangent: bool = False

    @property
    def length(self) -> Optional[float]:
        if self.points is None:
            return None
        return hyp_distance(*self.points)


def _linked(a: BoundaryPoint, b: BoundaryPoint, u: BoundaryPoint, v: BoundaryPoint) -> bool:
    """True when the geodesics (a, b) and (u, v) cross inside H²"""

    def det(p, q):
        (xp, yp), (xq, yq) = p.projective(), q.projective()
        return xp * yq - xq * yp

    return det(a, u) * det(b, v) * det(a, v) * det(b, u) < 0


def _intersection(edge: Tuple[BoundaryPoint, BoundaryPoint], g: Geodesic) -> PointH2:
    a, b = edge
    u, v = g.p, g.q
    if a.infinite or b.infinite:
        x = b.value if a.infinite else a.value
        return PointH2(x, math.sqrt((x - u.value) * (v.value - x)))
    if u.infinite or v.infinite:
        x = v.value if u.infinite else u.value
        return PointH2(x, math.sqrt((x - a.value) * (b.value - x)))
    # a + b - u - v summed from two differences of equal sign
    a, b, u, v = a.value, b.value, u.value, v.value
    if (a - u) * (b - v) < 0:
        a, b = b, a
    d = (a - u) + (b - v)
    x = u + (a - u) * (b - u) / d
    return PointH2(x, math.sqrt(-(a - u) * (b - u) * (v - a) * (v - b)) / abs(d))


def _position_along(g: Geodesic, z: PointH2) -> float:
    if g.q.infinite:
        return z.y
    if g.p.infinite:
        return -z.y
    return z.x if g.q.value > g.p.value else -z.x


def chord_endpoints_oracle(
    g: Geodesic, triangle: IdealTriangle = STANDARD_TRIANGLE, tol: float = BOUNDARY_TOLERANCE
) -> OracleChord:
    """Intersect g with the three edges of the triangle directly"""
    for end in (g.p, g.q):
        if any(end.isclose(w, tol) for w in triangle.vertices):
            return OracleChord(None, tangent=True)

    v1, v2, v3 = triangle.vertices
    crossings = [_intersection(e, g) for e in ((v1, v2), (v2, v3), (v3, v1)) if _linked(e[0], e[1], g.p, g.q)]
    if len(crossings) != 2:
        return OracleChord(None)
    crossings.sort(key=lambda z: _position_along(g, z))
    return OracleChord((crossings[0], crossings[1]))
