"""Deterministic quadrature for arc probabilities under the alternative patterns.

All supports used here are signed unions of barycentric "boxes"
``{y : lo_k <= y_k <= hi_k}``, and the proximity region N(x) is itself such a
box.  The area of a box has the closed form

    A(lo, hi) = sum over U of (-1)^|U| * (1 - sum_{k not in U} lo_k - sum_{k in U} hi_k)_+^2

(as a fraction of the triangle area), so ``f(x) = A(N(x) & S)`` is piecewise
quadratic in x.  Its pieces are separated by straight lines that can be
listed in advance.  The integration domain, one sixth of the triangle by
symmetry, is cut along every such line and each convex cell is integrated
with a collapsed Gauss-Legendre product rule, which is exact for quadratics.
Running a second, higher order rule gives the error estimate.

Coordinates: points are handled in the chart ``u = (b1, b2)`` with
``b3 = 1 - b1 - b2``; the triangle has chart area 1/2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .patterns import corner_threshold

_SUBSETS = [tuple(s) for r in range(4) for s in itertools.combinations(range(3), r)]
# one sixth of the triangle: b1 >= b2 >= b3, so min(b) = b3 throughout
FUNDAMENTAL = [(1.0, 0.0), (0.5, 0.5), (1.0 / 3.0, 1.0 / 3.0)]


@dataclass(frozen=True)
class Box:
    sign: int
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]


def support_boxes(kind: str, eps: float) -> list[Box]:
    """Inclusion-exclusion decomposition of a pattern's support into boxes."""
    if kind == "null" or eps == 0.0 and kind == "segregation":
        return [Box(1, (0.0, 0.0, 0.0), (1.0, 1.0, 1.0))]
    c = corner_threshold(kind, eps)
    if kind == "segregation":
        return [Box(1, (0.0, 0.0, 0.0), (c, c, c))]
    if kind == "association":
        boxes = []
        for s in _SUBSETS[1:]:
            lo = tuple(c if k in s else 0.0 for k in range(3))
            if sum(lo) < 1.0:
                boxes.append(Box((-1) ** (len(s) + 1), lo, (1.0, 1.0, 1.0)))
        return boxes
    raise ValueError(f"unknown pattern kind {kind!r}")


def box_area(lo, hi) -> np.ndarray:
    """Area fraction of ``{y in simplex : lo <= y <= hi}``; ``lo`` may be ``(n, 3)``."""
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), lo.shape)
    total = np.zeros(len(lo))
    for u in _SUBSETS:
        mask = np.zeros(3, dtype=bool)
        mask[list(u)] = True
        arg = 1.0 - np.where(mask, hi, lo).sum(axis=1)
        total += (-1) ** len(u) * np.maximum(arg, 0.0) ** 2
    return np.where(np.all(lo <= hi, axis=1), total, 0.0)


def support_area(boxes: list[Box]) -> float:
    return float(sum(b.sign * box_area(b.lo, b.hi)[0] for b in boxes))


def region_support_area(bary, tau: float, boxes: list[Box]) -> np.ndarray:
    """``A(N(x) & S)`` as a fraction of the triangle, for barycentric rows x."""
    bary = np.atleast_2d(bary)
    lo_n = bary - tau * bary.min(axis=1, keepdims=True)
    out = np.zeros(len(bary))
    for b in boxes:
        out += b.sign * box_area(np.maximum(lo_n, b.lo), b.hi)
    return out


# -- polygons in the chart ---------------------------------------------------


def _to_chart_line(coef, const, canonical: bool = True):
    """Barycentric ``coef . b = const`` as ``a . u = d`` in the chart, unit normal.

    With ``canonical`` the normal is flipped to a fixed orientation, which
    suits deduplication but loses the side of any inequality.
    """
    c1, c2, c3 = coef
    a = np.array([c1 - c3, c2 - c3])
    d = const - c3
    norm = math.hypot(*a)
    if norm < 1e-14:
        return None
    a, d = a / norm, d / norm
    if canonical and (a[0] < -1e-14 or (abs(a[0]) <= 1e-14 and a[1] < 0)):
        a, d = -a, -d
    return float(a[0]), float(a[1]), float(d)


def clip_halfplane(poly, a, d, keep_below: bool = True, tol: float = 1e-15):
    """Sutherland-Hodgman clip of a convex polygon against ``a . u <= d`` (or ``>=``)."""
    sgn = 1.0 if keep_below else -1.0
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        fp = sgn * (a[0] * p[0] + a[1] * p[1] - d)
        fq = sgn * (a[0] * q[0] + a[1] * q[1] - d)
        if fp <= tol:
            out.append(p)
        if (fp < -tol and fq > tol) or (fp > tol and fq < -tol):
            s = fp / (fp - fq)
            out.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    return out


def polygon_area(poly) -> float:
    if len(poly) < 3:
        return 0.0
    x = np.array([p[0] for p in poly])
    y = np.array([p[1] for p in poly])
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _split(cells, line, min_area=1e-20):
    a0, a1, d = line
    out = []
    for poly in cells:
        vals = [a0 * p[0] + a1 * p[1] - d for p in poly]
        if max(vals) <= 1e-14 or min(vals) >= -1e-14:
            out.append(poly)
            continue
        for below in (True, False):
            piece = clip_halfplane(poly, (a0, a1), d, below)
            if polygon_area(piece) > min_area:
                out.append(piece)
    return out


def _box_domain(box: Box):
    """The fundamental sixth of the triangle intersected with a box, in the chart."""
    poly = list(FUNDAMENTAL)
    for k in range(3):
        e = np.eye(3)[k]
        for bound, below in ((box.lo[k], False), (box.hi[k], True)):
            if (not below and bound <= 0.0) or (below and bound >= 1.0):
                continue
            line = _to_chart_line(e, bound, canonical=False)
            poly = clip_halfplane(poly, line[:2], line[2], below)
            if len(poly) < 3:
                return []
    return poly


def breaklines(tau: float, boxes: list[Box]) -> list[tuple[float, float, float]]:
    """Lines across which ``region_support_area`` changes its polynomial form (x_min = x_3)."""
    e = np.eye(3)
    lo_dir = [e[k] - tau * e[2] for k in range(3)]  # gradient of x_k - tau * x_3
    raw = []
    for b in boxes:
        for k in range(3):
            raw.append((lo_dir[k], b.lo[k]))
            raw.append((lo_dir[k], b.hi[k]))
        for v in _SUBSETS:
            for u in _SUBSETS:
                free = [k for k in v if k not in u]
                if not free:
                    continue
                coef = sum(lo_dir[k] for k in free)
                const = 1.0 - sum(b.lo[k] for k in range(3) if k not in u and k not in v)
                const -= sum(b.hi[k] for k in u)
                raw.append((coef, const))
    seen, lines = set(), []
    for coef, const in raw:
        line = _to_chart_line(coef, const)
        if line is None:
            continue
        key = tuple(round(x, 11) for x in line)
        if key not in seen:
            seen.add(key)
            lines.append(line)
    return lines


# -- Gauss-Legendre on triangles ---------------------------------------------


def _collapsed_rule(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    s, t = np.meshgrid(x, x, indexing="ij")
    ws = np.outer(w, w)
    return s.ravel(), t.ravel(), ws.ravel()


def _triangles_of(cells):
    tris = []
    for poly in cells:
        for k in range(1, len(poly) - 1):
            tris.append((poly[0], poly[k], poly[k + 1]))
    return np.array(tris, dtype=float).reshape(-1, 3, 2)


def integrate_cells(func, cells, order: int) -> float:
    """Sum of chart-area integrals of ``func`` (taking ``(n, 2)`` chart points) over cells."""
    tris = _triangles_of(cells)
    if len(tris) == 0:
        return 0.0
    s, t, w = _collapsed_rule(order)
    p0, p1, p2 = tris[:, 0], tris[:, 1], tris[:, 2]
    # Duffy map: p0 + s (p1 - p0) + s t (p2 - p1), Jacobian 2 * area * s
    pts = (
        p0[:, None, :]
        + s[None, :, None] * (p1 - p0)[:, None, :]
        + (s * t)[None, :, None] * (p2 - p1)[:, None, :]
    )
    area = 0.5 * np.abs(
        (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0])
    )
    vals = func(pts.reshape(-1, 2)).reshape(len(tris), -1)
    return float(np.sum(vals * (w * s)[None, :] * (2.0 * area)[:, None]))


def chart_to_bary(u) -> np.ndarray:
    u = np.atleast_2d(u)
    return np.column_stack([u[:, 0], u[:, 1], 1.0 - u[:, 0] - u[:, 1]])


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    cells: int


def alternative_arc_probability(tau: float, eps: float, kind: str, order: int = 3) -> QuadratureResult:
    """P(X2 in N(X1)) for X1, X2 iid uniform on the pattern's support.

    ``eps = 0`` is accepted and gives the null value.
    """
    boxes = support_boxes(kind, eps)
    lines = breaklines(tau, boxes)

    def integrand(u):
        return region_support_area(chart_to_bary(u), tau, boxes)

    lo_total = hi_total = 0.0
    ncells = 0
    for b in boxes:
        dom = _box_domain(b)
        if not dom:
            continue
        cells = [dom]
        for line in lines:
            cells = _split(cells, line)
        ncells += len(cells)
        lo_total += b.sign * integrate_cells(integrand, cells, order)
        hi_total += b.sign * integrate_cells(integrand, cells, order + 1)
    # chart area 1/2 per triangle and six symmetric copies: factor 2 * 6
    a_s = support_area(boxes)
    value = 12.0 * hi_total / a_s**2
    error = 12.0 * abs(hi_total - lo_total) / a_s**2
    return QuadratureResult(value, error, ncells)
