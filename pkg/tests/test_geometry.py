import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from conftest import SQRT3, barycentrics, random_triangle, triangles
from taupcd.errors import DegenerateTriangle, SingularMap
from taupcd.geometry import (
    STANDARD_EQUILATERAL,
    AffineMap2,
    Containment,
    Point2,
    Triangle,
    apply_map,
    barycentric,
    barycentric_many,
    compose,
    from_barycentric,
    invert_map,
    point_in_triangle,
    shear_to_equilateral,
    signed_area,
    to_equilateral,
)


def _same_vertex_set(a, b, tol):
    a = np.asarray(a)
    b = np.asarray(b)
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return np.all(d.min(axis=1) < tol) and np.all(d.min(axis=0) < tol)


class TestSignedArea:
    def test_unit_right_triangle(self):
        assert signed_area([(0, 0), (1, 0), (0, 1)]) == 0.5

    def test_equilateral(self, eq):
        assert signed_area(eq) == pytest.approx(SQRT3 / 4, abs=1e-15)

    def test_collinear_is_zero(self):
        assert signed_area([(0, 0), (1, 1), (2, 2)]) == 0.0

    def test_clockwise_is_negative(self):
        assert signed_area([(0, 0), (0, 1), (1, 0)]) == -0.5


class TestTriangle:
    def test_reorders_clockwise_input(self):
        t = Triangle.from_array([(0, 0), (0, 1), (1, 0)])
        assert t.v1 == (0, 0)
        assert signed_area(t) > 0

    def test_rejects_collinear(self):
        with pytest.raises(DegenerateTriangle):
            Triangle.from_array([(0, 0), (1, 1), (2, 2)])

    def test_tolerance_is_relative_to_scale(self):
        # the same shape at very different scales is accepted either way
        pts = np.array([(0, 0), (1, 0), (0.5, 1e-6)])
        for s in (1e-6, 1.0, 1e6):
            Triangle.from_array(pts * s)
        with pytest.raises(DegenerateTriangle):
            Triangle.from_array(np.array([(0, 0), (1, 0), (0.5, 1e-13)]) * 1e6)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            Triangle.from_array([(0, 0), (1, 0), (np.nan, 1)])

    def test_heights(self, eq):
        assert np.allclose(eq.heights(), SQRT3 / 2)


class TestBarycentric:
    def test_centroid(self, rng):
        t = random_triangle(rng)
        assert np.allclose(barycentric(t, t.centroid), 1 / 3, atol=1e-12)

    def test_vertex(self, eq):
        assert np.allclose(barycentric(eq, (0, 0)), (1, 0, 0), atol=1e-15)

    def test_edge_midpoint(self, eq):
        assert np.allclose(barycentric(eq, (0.5, 0)), (0.5, 0.5, 0), atol=1e-15)

    @given(triangles(), barycentrics(interior=False))
    def test_round_trip_and_sum(self, t, w):
        p = from_barycentric(t, w[None, :])[0]
        b = barycentric_many(t, p[None, :])[0]
        assert abs(b.sum() - 1.0) < 1e-12
        assert np.allclose(b, w, atol=1e-8)


class TestPointInTriangle:
    def test_centroid_interior(self, eq):
        assert point_in_triangle(eq, eq.centroid) is Containment.INTERIOR

    def test_vertex_boundary(self, eq):
        assert point_in_triangle(eq, (1, 0)) is Containment.BOUNDARY

    def test_far_point_outside(self, eq):
        assert point_in_triangle(eq, (10, 10)) is Containment.OUTSIDE

    def test_tolerance_band(self, eq):
        p = (0.5, -1e-11)
        assert point_in_triangle(eq, p) is Containment.BOUNDARY
        assert point_in_triangle(eq, p, tol=1e-13) is Containment.OUTSIDE


class TestAffineMaps:
    def test_identity(self):
        p = Point2(3.5, -2.0)
        assert apply_map(AffineMap2.identity(), p) == p

    def test_translation(self):
        m = AffineMap2(np.eye(2), [1, 2])
        assert apply_map(m, (0, 0)) == (1, 2)

    def test_inverse_round_trip(self, rng):
        m = AffineMap2(rng.normal(size=(2, 2)), rng.normal(size=2))
        p = rng.normal(size=(50, 2))
        assert np.allclose(invert_map(m)(m(p)), p, atol=1e-12)

    def test_singular(self):
        with pytest.raises(SingularMap):
            invert_map(AffineMap2([[1, 2], [2, 4]], [0, 0]))

    def test_compose_is_application_order(self):
        a = AffineMap2(np.eye(2), [1, 0])
        b = AffineMap2([[0, -1], [1, 0]], [0, 0])
        assert np.allclose(compose(a, b)((0, 0)), b(a((0, 0))))

    def test_compose_associative(self, rng):
        maps = [AffineMap2(rng.normal(size=(2, 2)), rng.normal(size=2)) for _ in range(3)]
        p = rng.normal(size=(5, 2))
        left = compose(compose(maps[0], maps[1]), maps[2])
        right = compose(maps[0], compose(maps[1], maps[2]))
        assert np.allclose(left(p), right(p), atol=1e-12)


class TestToEquilateral:
    def test_equilateral_is_identity_up_to_relabeling(self, eq):
        m = to_equilateral(eq)
        assert _same_vertex_set(m(eq.vertices), eq.vertices, 1e-12)

    def test_shear_is_identity_for_equilateral_basic_triangle(self):
        m = shear_to_equilateral(0.5, SQRT3 / 2)
        assert np.allclose(m.linear, np.eye(2), atol=1e-15)

    def test_shear_maps_basic_triangle(self):
        # the shear must send an arbitrary apex (c1, c2) onto (1/2, sqrt(3)/2)
        for c1, c2 in [(0.3, 0.4), (0.1, 0.9), (0.5, 0.2)]:
            m = shear_to_equilateral(c1, c2)
            assert np.allclose(m((c1, c2)), (0.5, SQRT3 / 2), atol=1e-14)
            assert np.allclose(m((1.0, 0.0)), (1.0, 0.0))

    def test_right_isosceles(self):
        t = Triangle.from_array([(0, 0), (2, 0), (0, 2)])
        m = to_equilateral(t)
        assert _same_vertex_set(m(t.vertices), STANDARD_EQUILATERAL.vertices, 1e-12)

    @settings(max_examples=200)
    @given(triangles())
    def test_vertices_land_on_equilateral(self, t):
        m = to_equilateral(t)
        assert _same_vertex_set(m(t.vertices), STANDARD_EQUILATERAL.vertices, 1e-9)

    @given(triangles(), st.lists(barycentrics(interior=False), min_size=1, max_size=5))
    def test_preserves_barycentric_up_to_relabeling(self, t, ws):
        # affine maps preserve barycentric coordinates, hence centres of mass and parallelism
        m = to_equilateral(t)
        w = np.array(ws)
        img = m(from_barycentric(t, w))
        mapped_vertices = m(t.vertices)
        assert np.allclose(img, w @ mapped_vertices, atol=1e-9)
        assert np.allclose(m(t.centroid), STANDARD_EQUILATERAL.centroid, atol=1e-9)

    def test_degenerate(self):
        with pytest.raises(DegenerateTriangle):
            to_equilateral([(0, 0), (1, 1), (3, 3)])

    def test_uniformity_preserved(self, rng):
        # uniform points in t map to uniform points in the equilateral triangle:
        # bin the image on a 16-cell barycentric grid (4 x 4 subdivision) and run chi-square
        t = random_triangle(rng)
        w = rng.dirichlet(np.ones(3), size=100_000)
        img = to_equilateral(t)(w @ t.vertices)
        b = barycentric_many(STANDARD_EQUILATERAL, img)
        k = 4
        i = np.clip(np.floor(b[:, 0] * k), 0, k - 1).astype(int)
        j = np.clip(np.floor(b[:, 1] * k), 0, k - 1).astype(int)
        up = (b[:, 0] * k - i) + (b[:, 1] * k - j) > 1
        cell = i * k + j + up * k * k
        counts = np.bincount(cell, minlength=2 * k * k)
        # only cells with i + j < k exist (up cells need i + j < k - 1)
        ii, jj = np.meshgrid(np.arange(k), np.arange(k), indexing="ij")
        down_ok = (ii + jj < k).ravel()
        up_ok = (ii + jj < k - 1).ravel()
        valid = np.concatenate([down_ok, up_ok])
        assert counts[~valid].sum() == 0
        obs = counts[valid]
        assert len(obs) == 16
        _, p = stats.chisquare(obs)
        assert p > 1e-3


def test_map_preserves_area_ratio(rng):
    t = random_triangle(rng)
    m = to_equilateral(t)
    assert abs(m.det) * t.area == pytest.approx(math.sqrt(3) / 4, rel=1e-12)
