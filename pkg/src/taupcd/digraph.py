"""Proximity catch digraphs over the X points of a Delaunay triangulation."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .delaunay import Triangulation, triangulate
from .errors import InvalidIndex, NoInteriorPoints, SelfPair, TooFewVertices
from .geometry import BARY_TOL, Triangle
from .proximity import catch_matrix, check_tau


@dataclass(frozen=True)
class Pcd:
    """A built digraph.  Vertices are the X points that fell inside the hull.

    ``arcs`` holds ordered pairs ``(i, j)`` (i catches j) sorted
    lexicographically; ``source_index`` maps vertices back to rows of the
    input array.
    """

    points: np.ndarray
    arcs: np.ndarray
    triangle_assignment: np.ndarray
    source_index: np.ndarray
    excluded_count: int
    tau: float

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    @cached_property
    def _offsets(self) -> np.ndarray:
        return np.searchsorted(self.arcs[:, 0], np.arange(self.n + 1))

    def out_neighbours(self, i: int) -> np.ndarray:
        lo, hi = self._offsets[i], self._offsets[i + 1]
        return self.arcs[lo:hi, 1]

    def has_arc(self, i: int, j: int) -> bool:
        nb = self.out_neighbours(i)
        k = np.searchsorted(nb, j)
        return bool(k < len(nb) and nb[k] == j)


def arc_count_bary(bary, tau: float, tol: float = BARY_TOL) -> int:
    """Number of arcs among points of one triangle given their barycentric coordinates."""
    if len(bary) < 2:
        return 0
    m = catch_matrix(bary, tau, tol)
    return int(m.sum() - np.trace(m))


def arc_count_grouped(tri_index, bary, tau: float, tol: float = BARY_TOL) -> int:
    """Arc count for points grouped by triangle index (no cross-triangle arcs)."""
    tri_index = np.asarray(tri_index)
    if tri_index.max(initial=0) == 0:
        return arc_count_bary(bary, tau, tol)
    order = np.argsort(tri_index, kind="stable")
    bounds = np.flatnonzero(np.diff(tri_index[order])) + 1
    return sum(arc_count_bary(bary[g], tau, tol) for g in np.split(order, bounds))


def build_pcd(tri: Triangulation | Triangle, x_points, tau: float, tol: float = BARY_TOL) -> Pcd:
    """Build the digraph: ``i -> j`` iff X_j lies in N(X_i) within their shared triangle."""
    tau = check_tau(tau)
    if isinstance(tri, Triangle):
        tri = triangulate(tri.vertices)
    x = np.asarray(x_points, dtype=float).reshape(-1, 2)
    loc = tri.locate_many(x, tol)
    keep = np.flatnonzero(loc >= 0)
    if len(keep) == 0:
        raise NoInteriorPoints("no X point lies inside the convex hull of Y")
    pts = x[keep]
    assign = loc[keep]

    arcs = []
    for j in np.unique(assign):
        members = np.flatnonzero(assign == j)
        if len(members) < 2:
            continue
        m = catch_matrix(tri.barycentric_in(int(j), pts[members]), tau, tol)
        np.fill_diagonal(m, False)
        src, dst = np.nonzero(m)
        arcs.append(np.column_stack([members[src], members[dst]]))
    arcs = np.concatenate(arcs) if arcs else np.empty((0, 2), dtype=np.int64)
    arcs = arcs[np.lexsort((arcs[:, 1], arcs[:, 0]))].astype(np.int64)
    return Pcd(
        points=pts,
        arcs=arcs,
        triangle_assignment=assign,
        source_index=keep,
        excluded_count=int(len(x) - len(keep)),
        tau=tau,
    )


def relative_density(d: Pcd) -> float:
    if d.n < 2:
        raise TooFewVertices(f"relative density needs at least 2 vertices, got {d.n}")
    return d.arc_count / (d.n * (d.n - 1))


def kernel_h(d: Pcd, i: int, j: int) -> int:
    """Number of arcs between vertices i and j (0, 1 or 2)."""
    for k in (i, j):
        if not 0 <= k < d.n:
            raise InvalidIndex(f"vertex index {k} out of range for n={d.n}")
    if i == j:
        raise SelfPair("kernel is defined for distinct vertices only")
    return int(d.has_arc(i, j)) + int(d.has_arc(j, i))
