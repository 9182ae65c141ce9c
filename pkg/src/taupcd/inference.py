"""Asymptotic moments of the relative density and the resulting tests.

The relative density ``rho_n(tau)`` of the digraph on ``n`` uniform points in
one triangle is half a U-statistic with kernel ``h``, with mean ``mu(tau)``
and ``Var[rho_n] ~ nu(tau) / n`` where ``nu = Cov[h12, h13]``, so

    R(tau) = sqrt(n) * (rho_n - mu) / sqrt(nu)

is asymptotically standard normal.  Large R indicates segregation, small R
association.  With several triangles weighted by relative area the moments
become ``mu_J`` and ``nu_J`` below.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import norm

from .errors import (
    BadWeights,
    DegenerateVariance,
    InvalidEpsilon,
    NumericalInstability,
    QuadratureNotConverged,
    TauOutOfRange,
)
from .patterns import EPS_MAX
from .proximity import check_tau
from .quadrature import alternative_arc_probability

SQRT3 = math.sqrt(3.0)
QUAD_TOL = 1e-6
PAE_STEP = 2e-3
PAE_MAX_DISAGREEMENT = 0.02


class Direction(str, enum.Enum):
    SEGREGATION = "segregation"
    ASSOCIATION = "association"
    TWO_SIDED = "two-sided"

    @classmethod
    def parse(cls, value) -> "Direction":
        if isinstance(value, cls):
            return value
        v = str(value).strip().lower().replace("_", "-")
        aliases = {"twosided": "two-sided", "two": "two-sided", "both": "two-sided"}
        return cls(aliases.get(v, v))


@dataclass(frozen=True)
class NullMoments:
    mu: float
    nu: float


def mu_null(tau: float) -> float:
    tau = check_tau(tau)
    return tau**2 / 6.0


def nu_null(tau: float) -> float:
    t = check_tau(tau)
    poly = 6 * t**5 - 3 * t**4 - 25 * t**3 + t**2 + 49 * t + 14
    return t**4 * poly / (45 * (t + 1) * (2 * t + 1) * (t + 2))


def null_moments(tau: float) -> NullMoments:
    return NullMoments(mu_null(tau), nu_null(tau))


def arc_prob_components(tau: float) -> tuple[float, float, float]:
    """``(P_2N, P_M, P_2G)``: probabilities that two further uniform points both lie
    in N(X1), one in N(X1) and one in Gamma_1(X1), or both in Gamma_1(X1)."""
    t = check_tau(tau)
    if t == 0.0:
        raise TauOutOfRange("tau must be positive for the component probabilities")
    p2n = t**4 / 15
    pm = (2 * t**4 - 3 * t**3 - 4 * t**2 + 10 * t + 4) * t**4 / (30 * (2 * t + 1) * (t + 2))
    p2g = -(t**2 - 7 * t - 2) * t**4 / (15 * (t + 1) * (2 * t + 1) * (t + 2))
    return p2n, pm, p2g


def _check_weights(weights) -> np.ndarray:
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0 or not np.all(np.isfinite(w)):
        raise BadWeights("weights must be a non-empty finite vector")
    if np.any(w < 0):
        raise BadWeights("weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise BadWeights(f"weights must sum to 1, got {w.sum():.12g}")
    return w


def multi_triangle_moments(tau: float, weights) -> tuple[float, float]:
    """``(mu_J, nu_J)`` for triangles with relative areas ``weights``."""
    w = _check_weights(weights)
    mu, nu = mu_null(tau), nu_null(tau)
    s2, s3 = float(np.sum(w**2)), float(np.sum(w**3))
    # s3 >= s2^2 by Jensen; clip rounding noise
    return mu * s2, nu * s3 + 4 * mu**2 * max(s3 - s2**2, 0.0)


@dataclass(frozen=True)
class TestResult:
    rho: float
    n: int
    J: int
    mu_used: float
    nu_used: float
    R: float
    direction: Direction
    p_value: float
    excluded_count: int = 0
    tau: float | None = None

    __test__ = False  # not a pytest class

    def rejects(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha

    def to_dict(self) -> dict:
        d = asdict(self)
        d["direction"] = self.direction.value
        return d


def p_value(R: float, direction) -> float:
    direction = Direction.parse(direction)
    if direction is Direction.SEGREGATION:
        return float(norm.sf(R))
    if direction is Direction.ASSOCIATION:
        return float(norm.cdf(R))
    return float(min(1.0, 2.0 * min(norm.sf(R), norm.cdf(R))))


def run_test(
    rho: float,
    n: int,
    tau: float,
    weights=(1.0,),
    direction="segregation",
    excluded_count: int = 0,
) -> TestResult:
    """Normal-approximation test of CSR from an observed relative density."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    w = _check_weights(weights)
    mu, nu = multi_triangle_moments(tau, w)
    if nu <= 0.0:
        raise DegenerateVariance(f"asymptotic variance is {nu} at tau={tau}; the test is undefined")
    R = math.sqrt(n) * (rho - mu) / math.sqrt(nu)
    direction = Direction.parse(direction)
    return TestResult(
        rho=float(rho),
        n=int(n),
        J=len(w),
        mu_used=mu,
        nu_used=nu,
        R=R,
        direction=direction,
        p_value=p_value(R, direction),
        excluded_count=int(excluded_count),
        tau=float(tau),
    )


def test_points(x_points, y_points, tau: float, direction="segregation") -> TestResult:
    """Triangulate Y, build the digraph on X and run the test."""
    from .delaunay import triangulate
    from .digraph import build_pcd, relative_density

    tri = triangulate(y_points)
    d = build_pcd(tri, x_points, tau)
    return run_test(
        relative_density(d), d.n, tau, tri.weights, direction, excluded_count=d.excluded_count
    )


test_points.__test__ = False


# -- alternatives ----------------------------------------------------------------


def _kind(kind) -> str:
    k = Direction.parse(kind)
    if k is Direction.TWO_SIDED:
        raise ValueError("alternative kind must be segregation or association")
    return k.value


def mu_alternative(tau: float, eps: float, kind="segregation", tol: float = QUAD_TOL) -> float:
    """Mean relative density under the segregation or association alternative."""
    tau = check_tau(tau)
    if tau == 0.0:
        raise TauOutOfRange("tau must be positive")
    if not 0.0 <= eps < EPS_MAX:
        raise InvalidEpsilon(f"eps must lie in [0, sqrt(3)/3), got {eps}")
    r = alternative_arc_probability(tau, float(eps), _kind(kind))
    if not r.error <= tol:
        raise QuadratureNotConverged(f"quadrature error estimate {r.error:.3g} exceeds {tol:g}")
    return r.value


def _step(tau: float) -> float:
    # the integrand has features of width ~tau, so shrink the step with it
    return PAE_STEP * min(1.0, tau)


def mu_alternative_derivative(tau: float, kind="segregation") -> float:
    """d mu / d eps at eps = 0 from one-sided differences with Richardson extrapolation."""
    tau = check_tau(tau)
    m0 = mu_alternative(tau, 0.0, kind)

    def d1(h):
        return (-3 * m0 + 4 * mu_alternative(tau, h, kind) - mu_alternative(tau, 2 * h, kind)) / (2 * h)

    h = _step(tau)
    a, b = d1(h), d1(h / 2)
    return (4 * b - a) / 3


def mu_alternative_second_derivative(tau: float, kind="segregation") -> float:
    """d^2 mu / d eps^2 at eps = 0.

    ``eps < 0`` is meaningless, so the forward difference
    ``(mu(0) - 2 mu(h) + mu(2h)) / h^2`` is used at h and h/2 and combined
    by Richardson extrapolation.  Raises ``NumericalInstability`` when the
    extrapolated value and the finer estimate disagree by more than 2%.
    """
    tau = check_tau(tau)
    if tau == 0.0:
        raise TauOutOfRange("tau must be positive")
    m0 = mu_alternative(tau, 0.0, kind)

    def d2(h):
        return (m0 - 2 * mu_alternative(tau, h, kind) + mu_alternative(tau, 2 * h, kind)) / h**2

    h = _step(tau)
    coarse, fine = d2(h), d2(h / 2)
    rich = 2 * fine - coarse
    if abs(rich - fine) > PAE_MAX_DISAGREEMENT * abs(rich):
        raise NumericalInstability(
            f"second-derivative extrapolation unstable at tau={tau}: {coarse:.6g}, {fine:.6g}"
        )
    return rich


def pitman_efficiency(tau: float, kind="segregation") -> float:
    """Pitman asymptotic efficiency ``mu''(0)^2 / nu(tau)`` of the one-sided test."""
    tau = check_tau(tau)
    if tau == 0.0:
        raise TauOutOfRange("PAE is undefined at tau=0")
    return mu_alternative_second_derivative(tau, kind) ** 2 / nu_null(tau)


def alternative_variance_positive(tau: float, eps: float, kind="segregation") -> bool:
    """Whether the asymptotic variance under the alternative is known to be positive."""
    kind = _kind(kind)
    if not 0.0 < tau <= 1.0 or not 0.0 < eps < EPS_MAX:
        return False
    if kind == "association":
        return True
    if eps <= 3 * SQRT3 / 10:
        return True
    return tau > 2 * (SQRT3 - 3 * eps) / (4 * eps - SQRT3)
