"""Replicated simulation of the relative density: null distributions, size and power.

Every replicate draws from its own counter-based stream: replicate ``r``
uses stream ``2r`` for the null sample and ``2r + 1`` for the alternative.
Replicates are farmed out in fixed chunks and written back by index, so the
output does not depend on how many workers ran.

Sampling and arc counting are done in barycentric coordinates of each
Delaunay triangle; the catch relation is affine invariant, so this is the
same digraph as the one built from Cartesian points.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .delaunay import Triangulation, triangulate
from .digraph import arc_count_grouped
from .errors import DegenerateVariance, TooFewSamples
from .geometry import STANDARD_EQUILATERAL
from .inference import (
    Direction,
    alternative_variance_positive,
    arc_prob_components,
    multi_triangle_moments,
    mu_null,
    nu_null,
    p_value,
)
from .patterns import PatternSpec, sample_simplex, sample_triangulation_bary, seeded_rng
from .proximity import catches_bary, check_tau

_CHUNK = 64


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    replicates: int = 2000
    tau_grid: tuple[float, ...] = (1.0,)
    pattern: PatternSpec = field(default_factory=PatternSpec.null)
    alpha: float = 0.05
    seed: int = 0
    y_points: np.ndarray | None = None  # None means the standard equilateral triangle
    direction: Direction | None = None
    y_points_file: str | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        grid = tuple(check_tau(t) for t in np.atleast_1d(self.tau_grid))
        if not grid:
            raise ValueError("tau_grid is empty")
        object.__setattr__(self, "tau_grid", grid)
        if self.direction is None:
            d = "association" if self.pattern.kind == "association" else "segregation"
        else:
            d = self.direction
        object.__setattr__(self, "direction", Direction.parse(d))
        if self.y_points is not None:
            object.__setattr__(self, "y_points", np.asarray(self.y_points, dtype=float))

    def triangulation(self) -> Triangulation:
        if self.y_points is None:
            return triangulate(STANDARD_EQUILATERAL.vertices)
        return triangulate(self.y_points)

    def describe(self) -> dict:
        return {
            "n": self.n,
            "replicates": self.replicates,
            "tau_grid": list(self.tau_grid),
            "pattern": self.pattern.kind,
            "eps": self.pattern.eps,
            "alpha": self.alpha,
            "seed": self.seed,
            "direction": self.direction.value,
            "y_points_file": self.y_points_file,
        }


def worker_count(workers: int | None = None) -> int:
    """Explicit argument, else ``PCD_THREADS``, else 1."""
    if workers is None:
        env = os.environ.get("PCD_THREADS", "").strip()
        workers = int(env) if env else 1
    return max(1, int(workers))


def _rho_grid(weights, spec: PatternSpec, n: int, taus, rng) -> np.ndarray:
    idx, bary = sample_triangulation_bary(rng, weights, spec, n)
    denom = n * (n - 1)
    return np.array([arc_count_grouped(idx, bary, t) / denom for t in taus])


def _run_replicates(cfg: ExperimentConfig, spec: PatternSpec, parity: int, workers) -> np.ndarray:
    weights = cfg.triangulation().weights
    out = np.empty((cfg.replicates, len(cfg.tau_grid)))

    def chunk(start):
        for r in range(start, min(start + _CHUNK, cfg.replicates)):
            rng = seeded_rng(cfg.seed, 2 * r + parity)
            out[r] = _rho_grid(weights, spec, cfg.n, cfg.tau_grid, rng)

    starts = range(0, cfg.replicates, _CHUNK)
    nw = worker_count(workers)
    if nw == 1:
        for s in starts:
            chunk(s)
    else:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            list(pool.map(chunk, starts))
    return out


def simulate_rho_samples(cfg: ExperimentConfig, workers: int | None = None) -> np.ndarray:
    """``(replicates, len(tau_grid))`` relative densities under ``cfg.pattern``."""
    parity = 0 if cfg.pattern.kind == "null" else 1
    return _run_replicates(cfg, cfg.pattern, parity, workers)


def simulate_rho_distribution(
    cfg: ExperimentConfig, tau: float | None = None, workers: int | None = None
) -> np.ndarray:
    """Replicated ``rho_n(tau)`` for one tau of the grid (the first by default)."""
    samples = simulate_rho_samples(cfg, workers)
    k = 0 if tau is None else cfg.tau_grid.index(float(tau))
    return samples[:, k]


@dataclass(frozen=True)
class PowerRow:
    tau: float
    mu: float
    nu: float
    size: float
    size_se: float
    power: float | None
    power_se: float | None
    replicates: int
    variance_positive: bool | None = None


@dataclass(frozen=True)
class PowerReport:
    config: dict
    rows: tuple[PowerRow, ...]
    runtime_s: float = 0.0

    def row(self, tau: float) -> PowerRow:
        for r in self.rows:
            if math.isclose(r.tau, tau):
                return r
        raise KeyError(tau)

    @property
    def has_power(self) -> bool:
        return any(r.power is not None for r in self.rows)

    def to_dict(self) -> dict:
        rows = []
        for r in self.rows:
            d = dict(r.__dict__)
            if not self.has_power:
                for k in ("power", "power_se", "variance_positive"):
                    d.pop(k)
            rows.append(d)
        return {"config": self.config, "rows": rows, "runtime_s": self.runtime_s}

    def to_csv(self) -> str:
        cols = ["tau", "mu", "nu", "size", "size_se", "replicates"]
        if self.has_power:
            cols[5:5] = ["power", "power_se"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in self.rows:
            w.writerow([repr(getattr(r, c)) if isinstance(getattr(r, c), float) else getattr(r, c) for c in cols])
        return buf.getvalue()


def _reject_rate(rho: np.ndarray, n: int, mu: float, nu: float, direction, alpha) -> float:
    R = math.sqrt(n) * (rho - mu) / math.sqrt(nu)
    p = np.array([p_value(r, direction) for r in R])
    return float(np.mean(p < alpha))


def estimate_size_power(cfg: ExperimentConfig, workers: int | None = None) -> PowerReport:
    """Empirical size (null sampler) and, for an alternative pattern, empirical power."""
    t0 = time.perf_counter()
    weights = cfg.triangulation().weights
    moments = [multi_triangle_moments(t, weights) for t in cfg.tau_grid]
    for t, (_, nu) in zip(cfg.tau_grid, moments):
        if nu <= 0.0:
            raise DegenerateVariance(f"asymptotic variance vanishes at tau={t}")
    null = _run_replicates(cfg, PatternSpec.null(), 0, workers)
    alt = None
    if cfg.pattern.kind != "null":
        alt = _run_replicates(cfg, cfg.pattern, 1, workers)
    N = cfg.replicates
    rows = []
    for k, (t, (mu, nu)) in enumerate(zip(cfg.tau_grid, moments)):
        size = _reject_rate(null[:, k], cfg.n, mu, nu, cfg.direction, cfg.alpha)
        power = power_se = positive = None
        if alt is not None:
            power = _reject_rate(alt[:, k], cfg.n, mu, nu, cfg.direction, cfg.alpha)
            power_se = math.sqrt(power * (1 - power) / N)
            positive = alternative_variance_positive(t, cfg.pattern.eps, cfg.pattern.kind)
        rows.append(
            PowerRow(t, mu, nu, size, math.sqrt(size * (1 - size) / N), power, power_se, N, positive)
        )
    return PowerReport(cfg.describe(), tuple(rows), time.perf_counter() - t0)


# -- verification of closed forms ---------------------------------------------------


@dataclass(frozen=True)
class Estimate:
    name: str
    estimate: float
    se: float
    exact: float

    @property
    def z(self) -> float:
        return (self.estimate - self.exact) / self.se if self.se > 0 else 0.0


def verify_arc_probabilities(tau: float, samples: int = 200_000, seed: int = 0) -> dict[str, Estimate]:
    """Monte Carlo estimates of mu, P_2N, P_M, P_2G and Cov[h12, h13] against closed forms."""
    tau = check_tau(tau)
    rng_pairs = seeded_rng(seed, 0)
    x1, x2 = sample_simplex(rng_pairs, samples), sample_simplex(rng_pairs, samples)
    arc = catches_bary(x1, x2, tau).astype(float)

    rng = seeded_rng(seed, 1)
    a, b, c = (sample_simplex(rng, samples) for _ in range(3))
    b_in_a = catches_bary(a, b, tau)
    c_in_a = catches_bary(a, c, tau)
    a_in_b = catches_bary(b, a, tau)
    a_in_c = catches_bary(c, a, tau)
    h12 = b_in_a.astype(float) + a_in_b
    h13 = c_in_a.astype(float) + a_in_c
    prod = (h12 - h12.mean()) * (h13 - h13.mean())

    def binom(name, hits, exact):
        p = float(np.mean(hits))
        return Estimate(name, p, math.sqrt(p * (1 - p) / samples), exact)

    out = {"mu": binom("mu", arc, mu_null(tau))}
    if tau > 0:
        p2n, pm, p2g = arc_prob_components(tau)
        out["p2n"] = binom("p2n", b_in_a & c_in_a, p2n)
        out["pm"] = binom("pm", b_in_a & a_in_c, pm)
        out["p2g"] = binom("p2g", a_in_b & a_in_c, p2g)
    cov = float(prod.sum() / (samples - 1))
    out["nu"] = Estimate("nu", cov, float(prod.std(ddof=1) / math.sqrt(samples)), nu_null(tau))
    return out


# -- summaries -------------------------------------------------------------------------


def summarize_moments(samples) -> tuple[float, float, float | None]:
    """Mean, unbiased variance and standardized third moment (None when the variance is 0)."""
    x = np.asarray(samples, dtype=float).ravel()
    if len(x) < 3:
        raise TooFewSamples(f"need at least 3 samples, got {len(x)}")
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    if np.ptp(x) == 0.0:
        return mean, 0.0, None
    return mean, var, float(stats.skew(x))


def kde_export(samples, grid_points: int = 512) -> dict:
    """Raw samples and a Gaussian KDE (Silverman bandwidth) on a fixed grid."""
    x = np.asarray(samples, dtype=float).ravel()
    out = {"samples": x.tolist(), "grid": None, "density": None, "bandwidth": None}
    if len(x) < 2 or np.ptp(x) == 0.0:
        return out
    kde = stats.gaussian_kde(x, bw_method="silverman")
    pad = 3 * kde.factor * x.std(ddof=1)
    grid = np.linspace(x.min() - pad, x.max() + pad, grid_points)
    out.update(grid=grid.tolist(), density=kde(grid).tolist(), bandwidth=float(kde.factor))
    return out
