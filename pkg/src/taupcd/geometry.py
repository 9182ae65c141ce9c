"""Planar primitives: points, triangles, barycentric coordinates, affine maps.

Everything here is a pure function over immutable values.  Array-valued
helpers (``barycentric_many`` and friends) accept ``(n, 2)`` arrays and are
what the hot loops elsewhere in the package call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateTriangle, OutsideTriangle, SingularMap

SQRT3 = math.sqrt(3.0)

#: relative degeneracy tolerance: |area| < AREA_RTOL * (longest edge)^2
AREA_RTOL = 1e-12
#: default boundary band in barycentric coordinates
BARY_TOL = 1e-9


class Point2(NamedTuple):
    x: float
    y: float

    @classmethod
    def of(cls, p) -> "Point2":
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"non-finite coordinate in point {p!r}")
        return cls(x, y)


class Containment(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass(frozen=True)
class Triangle:
    """A non-degenerate triangle, vertices stored counterclockwise.

    Clockwise input is reordered by swapping ``v2`` and ``v3``; the vertex
    ``v1`` is never moved.
    """

    v1: Point2
    v2: Point2
    v3: Point2

    def __post_init__(self):
        a, b, c = Point2.of(self.v1), Point2.of(self.v2), Point2.of(self.v3)
        area2 = _cross(b.x - a.x, b.y - a.y, c.x - a.x, c.y - a.y)
        longest = max(
            (b.x - a.x) ** 2 + (b.y - a.y) ** 2,
            (c.x - b.x) ** 2 + (c.y - b.y) ** 2,
            (a.x - c.x) ** 2 + (a.y - c.y) ** 2,
        )
        if not abs(area2) / 2.0 >= AREA_RTOL * longest or longest == 0.0:
            raise DegenerateTriangle(f"degenerate triangle {a}, {b}, {c}")
        if area2 < 0:
            b, c = c, b
        object.__setattr__(self, "v1", a)
        object.__setattr__(self, "v2", b)
        object.__setattr__(self, "v3", c)

    @classmethod
    def from_array(cls, pts) -> "Triangle":
        pts = np.asarray(pts, dtype=float)
        return cls(Point2.of(pts[0]), Point2.of(pts[1]), Point2.of(pts[2]))

    @property
    def vertices(self) -> np.ndarray:
        return np.array([self.v1, self.v2, self.v3], dtype=float)

    @property
    def centroid(self) -> Point2:
        v = self.vertices.mean(axis=0)
        return Point2(float(v[0]), float(v[1]))

    @property
    def area(self) -> float:
        return signed_area(self)

    def heights(self) -> np.ndarray:
        """Heights over edges e_1, e_2, e_3 (edge e_j is opposite v_j)."""
        v = self.vertices
        lengths = np.array(
            [np.hypot(*(v[2] - v[1])), np.hypot(*(v[0] - v[2])), np.hypot(*(v[1] - v[0]))]
        )
        return 2.0 * self.area / lengths


STANDARD_EQUILATERAL = Triangle(Point2(0.0, 0.0), Point2(1.0, 0.0), Point2(0.5, SQRT3 / 2))


def signed_area(t) -> float:
    """Half the cross product of the edge vectors; positive when counterclockwise.

    Accepts a ``Triangle`` or any three points (which may be collinear).
    """
    if isinstance(t, Triangle):
        a, b, c = t.v1, t.v2, t.v3
    else:
        a, b, c = (Point2.of(p) for p in t)
    return 0.5 * _cross(b[0] - a[0], b[1] - a[1], c[0] - a[0], c[1] - a[1])


def barycentric_many(t: Triangle, pts) -> np.ndarray:
    """Barycentric coordinates of an ``(n, 2)`` array of points, shape ``(n, 3)``."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    (ax, ay), (bx, by), (cx, cy) = t.v1, t.v2, t.v3
    det = (by - cy) * (ax - cx) + (cx - bx) * (ay - cy)
    dx = pts[:, 0] - cx
    dy = pts[:, 1] - cy
    b1 = ((by - cy) * dx + (cx - bx) * dy) / det
    b2 = ((cy - ay) * dx + (ax - cx) * dy) / det
    return np.column_stack([b1, b2, 1.0 - b1 - b2])


def barycentric(t: Triangle, p) -> tuple[float, float, float]:
    b = barycentric_many(t, [Point2.of(p)])[0]
    return float(b[0]), float(b[1]), float(b[2])


def from_barycentric(t: Triangle, bary) -> np.ndarray:
    """Inverse of ``barycentric_many``: ``(n, 3)`` weights to ``(n, 2)`` points."""
    return np.asarray(bary, dtype=float) @ t.vertices


def classify_barycentric(bary, tol: float = BARY_TOL) -> np.ndarray:
    """Vectorised containment class codes: 0 interior, 1 boundary, 2 outside."""
    bary = np.atleast_2d(bary)
    bmin = bary.min(axis=1)
    out = np.full(len(bary), 1, dtype=np.int8)
    out[bmin > tol] = 0
    out[bmin < -tol] = 2
    return out


def point_in_triangle(t: Triangle, p, tol: float = BARY_TOL) -> Containment:
    code = classify_barycentric(barycentric_many(t, [Point2.of(p)]), tol)[0]
    return (Containment.INTERIOR, Containment.BOUNDARY, Containment.OUTSIDE)[code]


def require_inside(t: Triangle, p, tol: float = BARY_TOL) -> np.ndarray:
    """Barycentric coordinates of ``p``; raises ``OutsideTriangle`` if it is outside ``t``."""
    b = barycentric_many(t, [Point2.of(p)])[0]
    if b.min() < -tol:
        raise OutsideTriangle(f"point {tuple(p)} lies outside {t}")
    return b


@dataclass(frozen=True)
class AffineMap2:
    """``p -> linear @ p + offset``."""

    linear: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        lin = np.array(self.linear, dtype=float).reshape(2, 2)
        off = np.array(self.offset, dtype=float).reshape(2)
        lin.setflags(write=False)
        off.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "offset", off)

    @classmethod
    def identity(cls) -> "AffineMap2":
        return cls(np.eye(2), np.zeros(2))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    def __call__(self, pts):
        if isinstance(pts, Point2) or np.ndim(pts) == 1:
            q = self.linear @ np.asarray(pts, dtype=float) + self.offset
            return Point2(float(q[0]), float(q[1]))
        return np.asarray(pts, dtype=float) @ self.linear.T + self.offset

    def then(self, other: "AffineMap2") -> "AffineMap2":
        """The map that applies ``self`` first and ``other`` second."""
        return AffineMap2(other.linear @ self.linear, other.linear @ self.offset + other.offset)

    def inverse(self) -> "AffineMap2":
        scale = max(1.0, float(np.abs(self.linear).max())) ** 2
        if abs(self.det) <= 1e-14 * scale:
            raise SingularMap("affine map is not invertible")
        inv = np.linalg.inv(self.linear)
        return AffineMap2(inv, -inv @ self.offset)

    def apply_triangle(self, t: Triangle) -> Triangle:
        return Triangle.from_array(self(t.vertices))


def apply_map(m: AffineMap2, p):
    return m(p)


def invert_map(m: AffineMap2) -> AffineMap2:
    return m.inverse()


def compose(*maps: AffineMap2) -> AffineMap2:
    """Compose maps in application order: ``compose(a, b)(p) == b(a(p))``."""
    out = AffineMap2.identity()
    for m in maps:
        out = out.then(m)
    return out


def shear_to_equilateral(c1: float, c2: float) -> AffineMap2:
    """Map the basic triangle (0,0), (1,0), (c1,c2) onto the standard equilateral one.

    ``(u, v) -> (u + (1 - 2 c1) v / (2 c2), sqrt(3) v / (2 c2))``
    """
    if c2 <= 0:
        raise DegenerateTriangle("basic triangle apex must lie above the x-axis")
    return AffineMap2([[1.0, (1.0 - 2.0 * c1) / (2.0 * c2)], [0.0, SQRT3 / (2.0 * c2)]], [0.0, 0.0])


def to_equilateral(t: Triangle) -> AffineMap2:
    """Affine map carrying ``t`` onto the standard equilateral triangle.

    Built as translation, rotation, optional reflection and scaling onto a
    basic triangle (0,0), (1,0), (c1,c2) with ``0 <= c1 <= 1/2``, followed by a
    shear.  The longest edge becomes the base and its endpoint nearer the third
    vertex goes to the origin.
    """
    if not isinstance(t, Triangle):
        t = Triangle.from_array(t)
    v = t.vertices
    edges = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
    lens = [np.sum((v[j] - v[i]) ** 2) for i, j, _ in edges]
    i, j, k = edges[int(np.argmax(lens))]
    if np.sum((v[k] - v[i]) ** 2) > np.sum((v[k] - v[j]) ** 2):
        i, j = j, i
    a, b, c = v[i], v[j], v[k]

    translate = AffineMap2(np.eye(2), -a)
    ang = math.atan2(b[1] - a[1], b[0] - a[0])
    cos, sin = math.cos(ang), math.sin(ang)
    rotate = AffineMap2([[cos, sin], [-sin, cos]], [0.0, 0.0])
    m = translate.then(rotate)
    if m(c)[1] < 0:
        m = m.then(AffineMap2([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0]))
    length = math.sqrt(lens[int(np.argmax(lens))])
    m = m.then(AffineMap2(np.eye(2) / length, [0.0, 0.0]))
    c1, c2 = m(c)
    return m.then(shear_to_equilateral(c1, c2))
