"""Delaunay triangulation of the Y points, point location and area weights.

Construction is incremental: the convex hull is fan-triangulated, the
remaining points are inserted in lexicographic order and every insertion is
followed by Lawson edge flips.  Cocircular configurations are left unflipped,
which makes the output deterministic; the number of such ties is reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import AllCollinear, DuplicatePoints, TooFewPoints
from .geometry import BARY_TOL, Point2, Triangle

DUPLICATE_TOL = 1e-12


class Location(NamedTuple):
    kind: str  # "triangle", "shared_edge" or "outside"
    index: int | None = None
    other: int | None = None


@dataclass(frozen=True)
class Triangulation:
    y_points: np.ndarray
    simplices: np.ndarray
    hull: np.ndarray
    weights: np.ndarray
    ties_broken: int = 0
    areas: np.ndarray = field(repr=False, default=None)

    @property
    def J(self) -> int:
        return len(self.simplices)

    @cached_property
    def triangles(self) -> list[Triangle]:
        return [Triangle.from_array(self.y_points[s]) for s in self.simplices]

    @cached_property
    def hull_area(self) -> float:
        h = self.y_points[self.hull]
        x, y = h[:, 0], h[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @cached_property
    def _bary_system(self):
        # per-triangle affine map from (x, y) to (b1, b2)
        v = self.y_points[self.simplices]
        a, b, c = v[:, 0], v[:, 1], v[:, 2]
        m = np.stack([a - c, b - c], axis=2)  # columns a-c, b-c
        return np.linalg.inv(m), c

    def barycentric_in(self, j: int, pts) -> np.ndarray:
        inv, c = self._bary_system
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        l12 = (pts - c[j]) @ inv[j].T
        return np.column_stack([l12, 1.0 - l12.sum(axis=1)])

    def locate_many(self, pts, tol: float = BARY_TOL) -> np.ndarray:
        """Containing triangle index per point, lowest index on ties, -1 outside the hull."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        inv, c = self._bary_system
        out = np.full(len(pts), -1, dtype=np.int64)
        chunk = max(1, 200_000 // max(1, self.J))
        for s in range(0, len(pts), chunk):
            p = pts[s : s + chunk]
            d = p[:, None, :] - c[None, :, :]
            l12 = np.einsum("jkl,njl->njk", inv, d)
            bmin = np.minimum(np.minimum(l12[..., 0], l12[..., 1]), 1.0 - l12.sum(axis=2))
            inside = bmin >= -tol
            hit = inside.any(axis=1)
            out[s : s + chunk][hit] = np.argmax(inside[hit], axis=1)
        return out

    def locate(self, p, tol: float = BARY_TOL) -> Location:
        p = np.asarray(Point2.of(p), dtype=float)
        inv, c = self._bary_system
        l12 = np.einsum("jkl,jl->jk", inv, p[None, :] - c)
        bmin = np.minimum(np.minimum(l12[:, 0], l12[:, 1]), 1.0 - l12.sum(axis=1))
        hits = np.flatnonzero(bmin >= -tol)
        if len(hits) == 0:
            return Location("outside")
        if len(hits) == 1:
            return Location("triangle", int(hits[0]))
        return Location("shared_edge", int(hits[0]), int(hits[1]))


def _validate(y_points) -> np.ndarray:
    pts = np.asarray(y_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("y_points must be an (m, 2) array")
    if len(pts) < 3:
        raise TooFewPoints(f"need at least 3 Y points, got {len(pts)}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("Y points contain non-finite coordinates")
    if cKDTree(pts).query_pairs(DUPLICATE_TOL):
        raise DuplicatePoints("Y contains duplicate points")
    return pts


def _convex_hull(pts: np.ndarray, order: np.ndarray) -> list[int]:
    """Andrew's monotone chain; collinear boundary points are dropped."""

    def turn(o, a, b):
        return (pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1]) - (pts[a, 1] - pts[o, 1]) * (
            pts[b, 0] - pts[o, 0]
        )

    lower: list[int] = []
    for i in order:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], i) <= 0:
            lower.pop()
        lower.append(int(i))
    upper: list[int] = []
    for i in order[::-1]:
        while len(upper) >= 2 and turn(upper[-2], upper[-1], i) <= 0:
            upper.pop()
        upper.append(int(i))
    return lower[:-1] + upper[:-1]


class _Mesh:
    def __init__(self, pts: np.ndarray):
        self.p = pts
        span = float(np.ptp(pts, axis=0).max())
        self.orient_eps = 1e-12 * span**2
        self.circle_eps = 1e-12 * span**4
        self.tris: list[tuple[int, int, int] | None] = []
        self.edge: dict[tuple[int, int], int] = {}

    def orient(self, a, b, c) -> float:
        p = self.p
        return float(
            (p[b, 0] - p[a, 0]) * (p[c, 1] - p[a, 1]) - (p[b, 1] - p[a, 1]) * (p[c, 0] - p[a, 0])
        )

    def incircle(self, a, b, c, d) -> float:
        """Positive when d lies strictly inside the circumcircle of ccw (a, b, c)."""
        m = self.p[[a, b, c]] - self.p[d]
        w = (m**2).sum(axis=1)
        return float(np.linalg.det(np.column_stack([m, w])))

    def add(self, a, b, c) -> int:
        t = len(self.tris)
        self.tris.append((a, b, c))
        self.edge[(a, b)] = t
        self.edge[(b, c)] = t
        self.edge[(c, a)] = t
        return t

    def remove(self, t: int) -> None:
        a, b, c = self.tris[t]
        for e in ((a, b), (b, c), (c, a)):
            if self.edge.get(e) == t:
                del self.edge[e]
        self.tris[t] = None

    def legalize(self, a, b, p) -> None:
        stack = [(a, b, p)]
        while stack:
            a, b, _ = stack.pop()
            t2 = self.edge.get((b, a))
            t1 = self.edge.get((a, b))
            if t2 is None or t1 is None:
                continue
            p = next(v for v in self.tris[t1] if v != a and v != b)
            d = next(v for v in self.tris[t2] if v != a and v != b)
            if self.incircle(a, b, p, d) > self.circle_eps:
                self.remove(t1)
                self.remove(t2)
                self.add(a, d, p)
                self.add(d, b, p)
                stack.append((a, d, p))
                stack.append((d, b, p))

    def insert(self, i: int) -> None:
        for t, tri in enumerate(self.tris):
            if tri is None:
                continue
            a, b, c = tri
            o = (self.orient(a, b, i), self.orient(b, c, i), self.orient(c, a, i))
            if min(o) < -self.orient_eps:
                continue
            on = [k for k in range(3) if abs(o[k]) <= self.orient_eps]
            if not on:
                self.remove(t)
                for u, v in ((a, b), (b, c), (c, a)):
                    self.add(u, v, i)
                for u, v in ((a, b), (b, c), (c, a)):
                    self.legalize(u, v, i)
                return
            u, v, w = [(a, b, c), (b, c, a), (c, a, b)][on[0]]
            t2 = self.edge.get((v, u))
            self.remove(t)
            self.add(v, w, i)
            self.add(w, u, i)
            todo = [(v, w), (w, u)]
            if t2 is not None:
                z = next(x for x in self.tris[t2] if x != u and x != v)
                self.remove(t2)
                self.add(u, z, i)
                self.add(z, v, i)
                todo += [(u, z), (z, v)]
            for e in todo:
                self.legalize(e[0], e[1], i)
            return
        raise RuntimeError(f"failed to locate point {i} during insertion")

    def sweep(self) -> int:
        """Flip until every interior edge is locally Delaunay; returns the tie count."""
        for _ in range(10_000):
            flipped = False
            for t, tri in enumerate(self.tris):
                if tri is None:
                    continue
                for a, b, p in ((tri[0], tri[1], tri[2]), (tri[1], tri[2], tri[0]), (tri[2], tri[0], tri[1])):
                    t2 = self.edge.get((b, a))
                    if t2 is None:
                        continue
                    d = next(v for v in self.tris[t2] if v != a and v != b)
                    if self.incircle(a, b, p, d) > self.circle_eps:
                        self.legalize(a, b, p)
                        flipped = True
                        break
            if not flipped:
                break
        ties = 0
        for (a, b), t in self.edge.items():
            t2 = self.edge.get((b, a))
            if t2 is None or a > b:
                continue
            p = next(v for v in self.tris[t] if v != a and v != b)
            d = next(v for v in self.tris[t2] if v != a and v != b)
            if abs(self.incircle(a, b, p, d)) <= self.circle_eps:
                ties += 1
        return ties


def triangulate(y_points) -> Triangulation:
    """Delaunay triangulation of ``y_points`` with relative-area weights."""
    pts = _validate(y_points)
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    hull = _convex_hull(pts, order)
    if len(hull) < 3:
        raise AllCollinear("Y points are all collinear")

    mesh = _Mesh(pts)
    for k in range(1, len(hull) - 1):
        mesh.add(hull[0], hull[k], hull[k + 1])
    on_hull = set(hull)
    for i in order:
        if int(i) not in on_hull:
            mesh.insert(int(i))
    ties = mesh.sweep()

    simplices = np.array(sorted(t for t in mesh.tris if t is not None), dtype=np.int64)
    v = pts[simplices]
    areas = 0.5 * (
        (v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
        - (v[:, 1, 1] - v[:, 0, 1]) * (v[:, 2, 0] - v[:, 0, 0])
    )
    weights = areas / areas.sum()
    return Triangulation(
        y_points=pts,
        simplices=simplices,
        hull=np.array(hull, dtype=np.int64),
        weights=weights,
        ties_broken=ties,
        areas=areas,
    )


def locate(tri: Triangulation, p, tol: float = BARY_TOL) -> Location:
    return tri.locate(p, tol)
