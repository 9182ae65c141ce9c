import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from shapely.geometry import Polygon
from scipy.stats import norm

from taupcd import inference
from taupcd.errors import (
    BadWeights,
    DegenerateVariance,
    NumericalInstability,
    QuadratureNotConverged,
    TauOutOfRange,
)
from taupcd.inference import (
    Direction,
    alternative_variance_positive,
    arc_prob_components,
    mu_alternative,
    mu_alternative_derivative,
    mu_alternative_second_derivative,
    mu_null,
    multi_triangle_moments,
    nu_null,
    pitman_efficiency,
    run_test,
    test_points,
)
from taupcd.quadrature import QuadratureResult

SQRT3 = math.sqrt(3.0)
TAU_GRID = np.linspace(0.01, 1.0, 100)


def nu_exact(t: Fraction) -> Fraction:
    poly = 6 * t**5 - 3 * t**4 - 25 * t**3 + t**2 + 49 * t + 14
    return t**4 * poly / (45 * (t + 1) * (2 * t + 1) * (t + 2))


class TestNullMoments:
    @pytest.mark.parametrize("tau, expected", [(1.0, 1 / 6), (0.0, 0.0), (0.5, 1 / 24)])
    def test_mu(self, tau, expected):
        assert mu_null(tau) == pytest.approx(expected, abs=1e-15)

    @pytest.mark.parametrize("tau, expected", [(1.0, 7 / 135), (0.0, 0.0), (0.5, 19 / 2880)])
    def test_nu(self, tau, expected):
        assert nu_null(tau) == pytest.approx(expected, abs=1e-15)

    def test_nu_exact_rationals(self):
        assert nu_exact(Fraction(1)) == Fraction(7, 135)
        assert nu_exact(Fraction(1, 2)) == Fraction(19, 2880)

    def test_ranges(self):
        mu = np.array([mu_null(t) for t in TAU_GRID])
        nu = np.array([nu_null(t) for t in TAU_GRID])
        assert np.all(np.diff(mu) > 0) and mu.max() <= 1 / 6
        assert np.all(nu > 0)

    @pytest.mark.parametrize("f", [mu_null, nu_null, arc_prob_components])
    def test_tau_out_of_range(self, f):
        with pytest.raises(TauOutOfRange):
            f(1.5)


class TestComponents:
    def test_values_at_one(self):
        p2n, pm, p2g = arc_prob_components(1.0)
        assert p2n == pytest.approx(1 / 15)
        # -(1 - 7 - 2) / (15 * 2 * 3 * 3) = 8 / 270
        assert p2g == pytest.approx(4 / 135)

    def test_identity_on_grid(self):
        for t in TAU_GRID:
            p2n, pm, p2g = arc_prob_components(t)
            assert abs(nu_null(t) - (p2n + 2 * pm + p2g - 4 * mu_null(t) ** 2)) < 1e-12

    def test_tau_zero(self):
        with pytest.raises(TauOutOfRange):
            arc_prob_components(0.0)


class TestMultiTriangle:
    def test_single(self):
        assert multi_triangle_moments(0.7, [1.0]) == pytest.approx((mu_null(0.7), nu_null(0.7)))

    def test_two_equal(self):
        mu, nu = multi_triangle_moments(1.0, [0.5, 0.5])
        assert mu == pytest.approx(1 / 12)
        assert nu == pytest.approx(7 / 540)

    def test_positive_on_grid(self):
        for w in np.linspace(0.01, 0.99, 50):
            for t in np.linspace(0.05, 1.0, 20):
                assert multi_triangle_moments(t, [w, 1 - w])[1] > 0

    @given(st.lists(st.floats(0.001, 1.0), min_size=1, max_size=30))
    def test_jensen(self, raw):
        w = np.array(raw) / np.sum(raw)
        assert np.sum(w**3) >= np.sum(w**2) ** 2 - 1e-15
        assert multi_triangle_moments(0.5, w)[1] >= 0

    @pytest.mark.parametrize("w", [[0.5, 0.6], [-0.1, 1.1], [], [np.nan, 1.0]])
    def test_bad_weights(self, w):
        with pytest.raises(BadWeights):
            multi_triangle_moments(1.0, w)


class TestRunTest:
    @pytest.mark.parametrize("arcs, R", [(98, 1.792), (53, -0.534), (37, -1.361)])
    def test_example_patterns(self, arcs, R):
        res = run_test(arcs / 380, 20, 1.0, [1.0], "segregation")
        assert res.R == pytest.approx(R, abs=0.01)

    def test_association_p_value(self):
        res = run_test(37 / 380, 20, 1.0, [1.0], Direction.ASSOCIATION)
        assert res.R == pytest.approx(-1.36, abs=0.01)
        assert res.p_value == pytest.approx(0.087, abs=0.002)
        assert res.p_value == pytest.approx(norm.cdf(res.R))

    def test_rho_equal_mu(self):
        res = run_test(mu_null(0.4), 50, 0.4)
        assert res.R == 0.0 and res.p_value == 0.5

    def test_two_sided(self):
        res = run_test(0.3, 30, 1.0, direction="two-sided")
        assert res.p_value == pytest.approx(2 * norm.sf(res.R))

    def test_degenerate(self):
        with pytest.raises(DegenerateVariance):
            run_test(0.0, 10, 0.0)

    def test_small_n(self):
        with pytest.raises(ValueError):
            run_test(0.1, 1, 1.0)

    def test_direction_parse(self):
        assert Direction.parse("Association") is Direction.ASSOCIATION
        assert Direction.parse("two_sided") is Direction.TWO_SIDED

    def test_points_pipeline(self, rng):
        y = np.array([(0, 0), (1, 0), (0, 1), (1, 1)], dtype=float)
        x = np.vstack([rng.random((60, 2)), [(3.0, 3.0)]])
        res = test_points(x, y, 1.0)
        assert res.J == 2 and res.excluded_count == 1 and res.n == 60
        assert res.mu_used == pytest.approx(1 / 12)


class TestAlternativeMeans:
    def test_null_limit(self):
        assert mu_alternative(0.5, 1e-8, "segregation") == pytest.approx(1 / 24, abs=1e-5)
        assert mu_alternative(0.5, 1e-8, "association") == pytest.approx(1 / 24, abs=1e-5)

    def test_directions(self):
        assert mu_alternative(0.5, SQRT3 / 8, "segregation") > 1 / 24
        assert mu_alternative(0.5, SQRT3 / 12, "association") < 1 / 24

    @pytest.mark.parametrize("tau", [0.25, 0.5, 1.0])
    def test_monotone_in_eps(self, tau):
        grid = np.linspace(0.02, 0.5, 5)
        s = [mu_alternative(tau, e, "segregation") for e in grid]
        # association flattens out once the corners no longer overlap, so only small eps is strict
        a = [mu_alternative(tau, e, "association") for e in np.linspace(0.01, 0.14, 5)]
        assert np.all(np.diff(s) > 0)
        assert np.all(np.diff(a) < 0)

    @pytest.mark.parametrize("tau", [0.25, 0.5, 0.75, 1.0])
    @pytest.mark.parametrize("kind", ["segregation", "association"])
    def test_first_derivative_vanishes(self, tau, kind):
        assert abs(mu_alternative_derivative(tau, kind)) < 1e-3

    def test_not_converged(self, monkeypatch):
        monkeypatch.setattr(
            inference, "alternative_arc_probability", lambda *a, **k: QuadratureResult(0.1, 1e-3, 1)
        )
        with pytest.raises(QuadratureNotConverged):
            mu_alternative(0.5, 0.1, "segregation")


def gamma1_of_centroid(tau):
    """Area fraction of {y : the centroid lies in N(y)}, by polygon clipping on one sixth."""
    # sixth b1 >= b2 >= b3 in the chart; there the condition is b1 - tau * b3 <= 1/3
    sixth = Polygon([(1, 0), (0.5, 0.5), (1 / 3, 1 / 3)])
    # (1 + tau) u + tau v <= 1/3 + tau, as a big polygon on the allowed side
    big = 50.0
    c = 1 / 3 + tau
    a0, a1 = 1 + tau, tau
    pts = [(-big, (c + a0 * big) / a1), (-big, -big), ((c + a1 * big) / a0, -big)]
    half = Polygon(pts)
    return 6 * 2 * sixth.intersection(half).area


class TestSecondDerivative:
    """Oracles from expanding the means to second order in eps.

    Segregation removes three corners of area fraction 4 eps^2/3 where no arcs
    start or end; to second order this yields mu'' = 16 mu = 8 tau^2 / 3.  For
    association the support shrinks toward the corners and the leading
    change is governed by the Gamma_1 region of the centroid, giving
    mu'' = -16 tau^2 - 24 g(tau) with g its area fraction.
    """

    @pytest.mark.parametrize("tau", [0.2, 0.5, 1.0])
    def test_segregation(self, tau):
        assert mu_alternative_second_derivative(tau, "segregation") == pytest.approx(8 * tau**2 / 3, rel=5e-3)

    @pytest.mark.parametrize("tau", [0.2, 0.4566, 1.0])
    def test_association(self, tau):
        expected = -16 * tau**2 - 24 * gamma1_of_centroid(tau)
        assert mu_alternative_second_derivative(tau, "association") == pytest.approx(expected, rel=5e-3)

    def test_centroid_gamma1_at_one(self):
        assert gamma1_of_centroid(1.0) == pytest.approx(2 / 9, abs=1e-12)

    def test_unstable_extrapolation(self, monkeypatch):
        monkeypatch.setattr(inference, "mu_alternative", lambda tau, eps, kind="s", tol=0: abs(eps) ** 1.5)
        with pytest.raises(NumericalInstability):
            mu_alternative_second_derivative(0.5, "segregation")


class TestPitman:
    def test_segregation_endpoint(self):
        assert pitman_efficiency(1.0, "segregation") == pytest.approx(960 / 7, rel=0.02)

    def test_association_endpoint(self):
        assert pitman_efficiency(1.0, "association") == pytest.approx(61440 / 7, rel=0.02)

    def test_segregation_small_tau(self):
        assert pitman_efficiency(0.01, "segregation") == pytest.approx(320 / 7, rel=0.05)

    def test_tau_zero(self):
        with pytest.raises(TauOutOfRange):
            pitman_efficiency(0.0)

    def test_segregation_increasing(self):
        vals = [pitman_efficiency(t, "segregation") for t in (0.2, 0.4, 0.6, 0.8, 1.0)]
        assert np.all(np.diff(vals) > 0)


class TestVariancePositivity:
    def test_association_everywhere(self):
        assert alternative_variance_positive(0.3, 0.5, "association")

    def test_segregation_small_eps(self):
        assert alternative_variance_positive(0.01, 3 * SQRT3 / 10, "segregation")

    def test_segregation_large_eps_needs_large_tau(self):
        eps = 0.55
        bound = 2 * (SQRT3 - 3 * eps) / (4 * eps - SQRT3)
        assert not alternative_variance_positive(bound * 0.9, eps, "segregation")
        assert alternative_variance_positive(min(1.0, bound * 1.1), eps, "segregation")

    def test_outside_domain(self):
        assert not alternative_variance_positive(0.0, 0.2)
        assert not alternative_variance_positive(0.5, 0.6)
