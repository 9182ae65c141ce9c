"""The tau-factor central similarity proximity map.

For a point x of a triangle T let ``b(x)`` be its barycentric coordinates
and ``m(x) = min_k b_k(x)``.  The edge region of x is the edge opposite the
vertex with the smallest coordinate, and the proximity region is the
triangle similar to T, centred at x, whose side parallel to that edge sits
at ``tau`` times x's distance to the edge.  In barycentric terms it is

    N(x) = { y : b_k(y) >= b_k(x) - tau * m(x)  for k = 1, 2, 3 },

which is affine invariant.  The vectorised helpers below work directly on
barycentric arrays; the scalar API builds the same objects in Cartesian
coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutsideSubregion, TauBoundary, TauOutOfRange
from .geometry import (
    BARY_TOL,
    SQRT3,
    Point2,
    Triangle,
    barycentric_many,
    require_inside,
)


def check_tau(tau: float) -> float:
    tau = float(tau)
    if not 0.0 <= tau <= 1.0 or math.isnan(tau):
        raise TauOutOfRange(f"tau must lie in [0, 1], got {tau}")
    return tau


@dataclass(frozen=True)
class ProximityRegion:
    """Either the singleton ``{point}`` or a triangle similar to the parent."""

    point: Point2
    triangle: Triangle | None = None
    scale: float = 0.0

    @property
    def is_singleton(self) -> bool:
        return self.triangle is None

    @property
    def area(self) -> float:
        return 0.0 if self.triangle is None else self.triangle.area


def edge_region(t: Triangle, x, tol: float = BARY_TOL) -> int:
    """Index ``j`` in {1, 2, 3} of the edge e_j (opposite v_j) whose region holds x.

    Points on a median segment go to the lowest qualifying index.
    """
    b = require_inside(t, x, tol)
    return int(np.flatnonzero(b <= b.min() + tol)[0]) + 1


def proximity_region(t: Triangle, x, tau: float, tol: float = BARY_TOL) -> ProximityRegion:
    tau = check_tau(tau)
    b = require_inside(t, x, tol)
    x = Point2.of(x)
    bmin = float(b.min())
    if tau == 0.0 or bmin <= tol:
        return ProximityRegion(x)
    # scale = 3 tau d(x, e(x)) / h(e(x)) and d/h is the smallest barycentric coordinate
    s = 3.0 * tau * bmin
    c = t.vertices.mean(axis=0)
    verts = np.asarray(x) + s * (t.vertices - c)
    return ProximityRegion(x, Triangle.from_array(verts), s)


def region_area(t: Triangle, x, tau: float, tol: float = BARY_TOL) -> float:
    r = proximity_region(t, x, tau, tol)
    return 0.0 if r.is_singleton else r.scale**2 * t.area


def catches_bary(bx, by, tau: float, tol: float = BARY_TOL) -> np.ndarray:
    """Elementwise ``by[i] in N(bx[i])`` for barycentric arrays of matching shape ``(..., 3)``.

    Broadcasting is allowed, e.g. ``bx[:, None, :]`` against ``by[None, :, :]``
    yields the full catch matrix.
    """
    bx = np.asarray(bx, dtype=float)
    by = np.asarray(by, dtype=float)
    bmin = bx.min(axis=-1, keepdims=True)
    inside = np.all(by >= bx - tau * bmin - tol, axis=-1)
    singleton = (bmin[..., 0] <= tol) | (tau == 0.0)
    if np.any(singleton):
        same = np.all(np.abs(by - bx) <= tol, axis=-1)
        inside = np.where(singleton, same, inside)
    return inside


def catch_matrix(bary, tau: float, tol: float = BARY_TOL) -> np.ndarray:
    """``M[i, j]`` is True when point j lies in N(point i); the diagonal is kept."""
    bary = np.asarray(bary, dtype=float)
    return catches_bary(bary[:, None, :], bary[None, :, :], tau, tol)


def in_proximity_region(t: Triangle, x, tau: float, y, tol: float = BARY_TOL) -> bool:
    """Closed-region membership test ``y in N(x)``."""
    tau = check_tau(tau)
    bx = require_inside(t, x, tol)
    by = require_inside(t, y, tol)
    return bool(catches_bary(bx, by, tau, tol))


def in_gamma1(t: Triangle, x, tau: float, y, tol: float = BARY_TOL) -> bool:
    """``y`` is in the Gamma_1 region of x, i.e. ``x in N(y)``."""
    return in_proximity_region(t, y, tau, x, tol)


def gamma1_area_closed(x, tau: float, tol: float = 1e-12) -> tuple[str, float]:
    """Closed-form area of the Gamma_1 region on the standard equilateral triangle.

    Valid for x in the subtriangle with corners (0,0), (1/2,0) and the centre
    of mass, and for ``0 < tau < 1``.  Returns the case label ("R1".."R4")
    and the area in absolute units (the full triangle has area sqrt(3)/4).
    """
    tau = check_tau(tau)
    if tau == 1.0:
        raise TauBoundary("the case formulas have (tau - 1) factors; use tau < 1")
    if tau == 0.0:
        raise TauOutOfRange("tau must be positive")
    u, v = Point2.of(x)
    if not (-tol <= u <= 0.5 + tol and -tol <= v <= u / SQRT3 + tol):
        raise OutsideSubregion(f"{(u, v)} is outside the fundamental subtriangle")
    t = tau
    q1 = (1 - t) / (2 * SQRT3)
    q2 = (u - 1) * (t - 1) / (SQRT3 * (1 + t))
    q3 = (1 - t) * u / (SQRT3 * (1 + t))
    s1 = (1 - t) / 2
    if v <= q3:
        return "R1", 3 * t**2 * SQRT3 * v**2 / ((t - 1) ** 2 * (2 * t + 1))
    if u <= s1 or v <= q2:
        num = u**2 * t + 2 * SQRT3 * u * v * t - v**2 * t - u**2 + 2 * SQRT3 * u * v - 3 * v**2
        return "R2", 3 * SQRT3 * num * t / (4 * (1 - t) * (2 * t + 1) * (t + 2))
    if v <= q1:
        num = (
            2 * u**2 * t**2 + 2 * v**2 * t**2 - 4 * u**2 * t - 2 * u * t**2 + 4 * v**2 * t
            + 2 * SQRT3 * v * t**2 + 2 * u**2 + 4 * u * t + 6 * v**2 + t**2 - 2 * u
            - 2 * SQRT3 * v - 2 * t + 1
        )
        return "R3", -3 * SQRT3 * num * t / (4 * (2 * t + 1) * (t - 1) ** 2 * (t + 2))
    num = 3 * u**2 + 3 * v**2 - 3 * u - SQRT3 * v - t + 1
    return "R4", -SQRT3 * num * t / (2 * (2 * t + 1) * (t + 2))


def gamma1_area_mc(t: Triangle, x, tau: float, samples: int, rng) -> tuple[float, float]:
    """Monte Carlo area of Gamma_1(x) and its binomial standard error."""
    from .patterns import sample_uniform_triangle

    bx = barycentric_many(t, [x])[0]
    by = barycentric_many(t, sample_uniform_triangle(rng, t, samples))
    hit = catches_bary(by, bx[None, :], tau)
    p = float(hit.mean())
    return p * t.area, math.sqrt(p * (1 - p) / samples) * t.area
