"""Samplers for complete spatial randomness and the two alternative patterns.

Alternatives are defined by corner triangles cut off parallel to the opposite
edge.  On the standard equilateral triangle a corner of height ``eps`` is
``{b_i >= 1 - 2 eps / sqrt(3)}`` in barycentric coordinates, which covers the
area fraction ``4 eps^2 / 3``.  The same barycentric description is used in
every triangle, so the induced distribution is the same after mapping any
triangle to the equilateral one.

* segregation(eps): uniform on the triangle minus the three corners of height eps
* association(eps): uniform on the union of the corners of height sqrt(3)/3 - eps
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .delaunay import Triangulation
from .errors import InvalidEpsilon, OverlapWarning
from .geometry import SQRT3, Point2, Triangle, from_barycentric

EPS_MAX = SQRT3 / 3
KINDS = ("null", "segregation", "association")


def seeded_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``(seed, stream)``; streams never overlap."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class PatternSpec:
    kind: str = "null"
    eps: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind in ("csr", "nullcsr"):
            kind = "null"
        if kind not in KINDS:
            raise ValueError(f"unknown pattern {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        eps = float(self.eps)
        if kind == "null":
            eps = 0.0
        elif not 0.0 < eps < EPS_MAX:
            raise InvalidEpsilon(f"eps must lie in (0, sqrt(3)/3), got {self.eps}")
        object.__setattr__(self, "eps", eps)

    @classmethod
    def null(cls) -> "PatternSpec":
        return cls("null")

    @classmethod
    def segregation(cls, eps: float) -> "PatternSpec":
        return cls("segregation", eps)

    @classmethod
    def association(cls, eps: float) -> "PatternSpec":
        return cls("association", eps)

    @property
    def threshold(self) -> float:
        """Barycentric level c defining the corners ``{b_i >= c}``."""
        return corner_threshold(self.kind, self.eps)

    @property
    def support_fraction(self) -> float:
        """Area of the support as a fraction of the triangle."""
        return support_fraction(self.kind, self.eps)

    @property
    def corners_overlap(self) -> bool:
        """Corners share area (touching at a single point does not count)."""
        if self.kind == "null":
            return False
        return self.threshold < 0.5

    def contains(self, bary) -> np.ndarray:
        return in_support(self.kind, self.eps, bary)


def corner_threshold(kind: str, eps: float) -> float:
    if kind == "segregation":
        return 1.0 - 2.0 * eps / SQRT3
    if kind == "association":
        return 1.0 / 3.0 + 2.0 * eps / SQRT3
    return 1.0


def delta_to_eps(delta: float) -> float:
    """Corner height on the equilateral scale carving area fraction ``delta`` per corner."""
    return math.sqrt(3.0 * delta / 4.0)


def support_fraction(kind: str, eps: float) -> float:
    c = corner_threshold(kind, eps)
    corner = (1.0 - c) ** 2
    pair = max(0.0, 1.0 - 2.0 * c) ** 2
    if kind == "segregation":
        return 1.0 - 3.0 * corner + 3.0 * pair
    if kind == "association":
        return 3.0 * corner - 3.0 * pair
    return 1.0


def in_support(kind: str, eps: float, bary) -> np.ndarray:
    bary = np.atleast_2d(bary)
    if kind == "null":
        return np.ones(len(bary), dtype=bool)
    c = corner_threshold(kind, eps)
    in_corner = np.any(bary >= c, axis=1)
    return ~in_corner if kind == "segregation" else in_corner


def sample_simplex(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform barycentric coordinates via the square-root warp."""
    u = rng.random((size, 2))
    r = np.sqrt(u[:, 0])
    return np.column_stack([1.0 - r, r * (1.0 - u[:, 1]), r * u[:, 1]])


def sample_uniform_triangle(rng: np.random.Generator, t: Triangle, size: int | None = None):
    """Uniform point(s) in ``t``; a ``Point2`` when ``size`` is None, else ``(size, 2)``."""
    if size is None:
        p = from_barycentric(t, sample_simplex(rng, 1))[0]
        return Point2(float(p[0]), float(p[1]))
    return from_barycentric(t, sample_simplex(rng, size))


def _sample_segregation(rng, c: float, n: int) -> np.ndarray:
    accept = max(support_fraction("segregation", (1 - c) * SQRT3 / 2), 1e-3)
    out, have = [], 0
    while have < n:
        m = int(1.2 * (n - have) / accept) + 16
        b = sample_simplex(rng, m)
        b = b[np.all(b < c, axis=1)]
        out.append(b)
        have += len(b)
    return np.concatenate(out)[:n]


def _sample_association(rng, c: float, n: int) -> np.ndarray:
    eye = np.eye(3)
    out, have = [], 0
    while have < n:
        m = int(1.6 * (n - have)) + 16
        corner = rng.integers(0, 3, size=m)
        w = sample_simplex(rng, m)
        apex = eye[corner]
        # the two base points of corner i are c e_i + (1 - c) e_j for j != i
        j = (corner + 1) % 3
        k = (corner + 2) % 3
        b = w[:, :1] * apex + w[:, 1:2] * (c * apex + (1 - c) * eye[j]) + w[:, 2:] * (
            c * apex + (1 - c) * eye[k]
        )
        # keep a point only if its corner is the lowest-index corner containing it
        first = np.argmax(b >= c, axis=1)
        keep = (first == corner) & np.any(b >= c, axis=1)
        out.append(b[keep])
        have += int(keep.sum())
    return np.concatenate(out)[:n]


def sample_pattern_bary(rng: np.random.Generator, spec: PatternSpec, n: int) -> np.ndarray:
    """``n`` barycentric samples from ``spec`` within a single triangle."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if spec.kind == "null":
        return sample_simplex(rng, n)
    if spec.kind == "segregation":
        return _sample_segregation(rng, spec.threshold, n)
    return _sample_association(rng, spec.threshold, n)


def sample_triangulation_bary(
    rng: np.random.Generator, weights, spec: PatternSpec, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Triangle indices (drawn with probabilities ``weights``) and barycentric coordinates."""
    weights = np.asarray(weights, dtype=float)
    if len(weights) == 1:
        idx = np.zeros(n, dtype=np.int64)
    else:
        idx = rng.choice(len(weights), size=n, p=weights)
    return idx, sample_pattern_bary(rng, spec, n)


def sample_pattern(
    rng: np.random.Generator, tri: Triangulation | Triangle, spec: PatternSpec, n: int
) -> np.ndarray:
    """``(n, 2)`` points drawn from ``spec`` on a triangle or a whole triangulation."""
    if spec.corners_overlap:
        warnings.warn(
            f"{spec.kind} corner regions meet at eps={spec.eps:.6g}; sampling stays exact",
            OverlapWarning,
            stacklevel=2,
        )
    if isinstance(tri, Triangle):
        return from_barycentric(tri, sample_pattern_bary(rng, spec, n))
    idx, bary = sample_triangulation_bary(rng, tri.weights, spec, n)
    verts = tri.y_points[tri.simplices[idx]]
    return np.einsum("nk,nkd->nd", bary, verts)
