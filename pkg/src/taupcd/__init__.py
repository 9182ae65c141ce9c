"""tau-factor central similarity proximity catch digraphs and the relative-density test."""

from .delaunay import Triangulation, triangulate
from .digraph import Pcd, build_pcd, kernel_h, relative_density
from .geometry import STANDARD_EQUILATERAL, Point2, Triangle, to_equilateral
from .inference import (
    Direction,
    TestResult,
    arc_prob_components,
    mu_alternative,
    mu_null,
    multi_triangle_moments,
    nu_null,
    pitman_efficiency,
    run_test,
    test_points,
)
from .patterns import PatternSpec, sample_pattern, seeded_rng
from .proximity import proximity_region

__version__ = "0.1.0"

__all__ = [
    "Direction",
    "PatternSpec",
    "Pcd",
    "Point2",
    "STANDARD_EQUILATERAL",
    "TestResult",
    "Triangle",
    "Triangulation",
    "arc_prob_components",
    "build_pcd",
    "kernel_h",
    "mu_alternative",
    "mu_null",
    "multi_triangle_moments",
    "nu_null",
    "pitman_efficiency",
    "proximity_region",
    "relative_density",
    "run_test",
    "sample_pattern",
    "seeded_rng",
    "test_points",
    "to_equilateral",
    "triangulate",
]
