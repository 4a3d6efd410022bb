"""Confidence-weighted expectations for a single free parameter.

The estimator integrates uniformly over confidence levels: every level in
``(0, 1)`` contributes equally, and at each level the observable is averaged
over all parameter values whose alpha equals that level.  Levels without any
solution are dropped and the remaining measure is reported as ``K``.

Two evaluation routes are offered.  The alpha-space route samples alpha on a
parameter grid, splits it into monotone segments and root-finds every level
on every segment.  The closed-weight route integrates over the parameter with
an explicit weight function (the alpha slope).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, GridTooCoarseError, NumericalError
from .models import (
    BinomialSpec,
    Dataset,
    GaussianSpec,
    alpha_binomial,
    alpha_gaussian,
    gaussian_t,
)
from .numerics.special import normal_quantile
from .report import EstimateReport

Observable = Callable[[np.ndarray], np.ndarray]

DEFAULT_LEVELS = 2000
DEFAULT_GRID_SIZE = 4001
DEFAULT_EPS = 1e-4
ROOT_RTOL = 1e-10
# alpha this close to 1 is treated as saturated; rounding jitter there is not structure
SATURATION = 1e-9


@dataclass(frozen=True)
class GridSpec:
    lower: float
    upper: float
    size: int = DEFAULT_GRID_SIZE
    spacing: str = "linear"

    def __post_init__(self):
        if not (math.isfinite(self.lower) and math.isfinite(self.upper) and self.lower < self.upper):
            raise DomainError("grid bounds must be finite with lower < upper")
        if self.size < 3:
            raise DomainError("grid needs at least 3 points")
        if self.spacing not in ("linear", "log"):
            raise DomainError("spacing must be 'linear' or 'log'")
        if self.spacing == "log" and self.lower <= 0:
            raise DomainError("log spacing needs a positive lower bound")

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lower, self.upper, self.size)
        return np.linspace(self.lower, self.upper, self.size)

    def as_dict(self) -> dict[str, Any]:
        return {"lower": self.lower, "upper": self.upper, "size": self.size, "spacing": self.spacing}


@dataclass(frozen=True)
class AlphaCurve:
    """Alpha sampled on a parameter grid with its monotone segments.

    ``segments`` holds inclusive ``(start, stop)`` index ranges over which
    alpha is strictly monotone; neighbouring segments share their turning
    point.  ``func`` evaluates alpha off-grid and is used for bisection.
    """

    grid: np.ndarray
    alpha: np.ndarray
    segments: tuple[tuple[int, int], ...]
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    parameter: str = "tau"

    @classmethod
    def from_function(cls, func, grid, parameter: str = "tau",
                      min_points: int = 3) -> "AlphaCurve":
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing with at least 3 points")
        alpha = np.asarray(func(grid), dtype=float)
        if np.any((alpha < 0) | (alpha > 1)) or not np.all(np.isfinite(alpha)):
            raise NumericalError("alpha values outside [0, 1]")
        alpha = np.where(alpha > 1.0 - SATURATION, 1.0, alpha)
        segments = monotone_segments(alpha)
        for s, e in segments:
            if e - s + 1 < min_points:
                raise GridTooCoarseError(
                    f"monotone segment [{grid[s]:.6g}, {grid[e]:.6g}] has fewer than "
                    f"{min_points} grid points"
                )
        return cls(grid, alpha, segments, func, parameter)

    @property
    def span(self) -> float:
        return float(self.grid[-1] - self.grid[0])


def monotone_segments(alpha: np.ndarray) -> tuple[tuple[int, int], ...]:
    """Maximal index runs where ``alpha`` strictly increases or strictly decreases."""
    step = np.sign(np.diff(alpha))
    segments = []
    start = 0
    for i in range(1, len(step) + 1):
        if i == len(step) or step[i] != step[start]:
            if step[start] != 0:
                segments.append((start, i))
            start = i
    return tuple(segments)


@dataclass(frozen=True)
class LevelSolutions:
    level: float
    roots: tuple[float, ...]

    @property
    def N(self) -> int:
        return len(self.roots)


def alpha_function(model, data: Dataset | None) -> tuple[Callable, str]:
    """Vectorized alpha as a function of the single free parameter."""
    if isinstance(model, GaussianSpec):
        n = len(data)
        if model.free == "mu":
            return (lambda mu: alpha_gaussian(gaussian_t(data, mu, model.sigma), n)), "mu"
        _require_spread(data, model.mu)
        return (lambda sigma: alpha_gaussian(gaussian_t(data, model.mu, sigma), n)), "sigma"
    if isinstance(model, BinomialSpec):
        return (lambda p: alpha_binomial(model.k_observed, model.n, p)), "p"
    raise TypeError(f"no single free parameter in {model!r}")


def _require_spread(data: Dataset, mu: float) -> float:
    s = float(np.sum((data.x - mu) ** 2))
    if s == 0.0:
        raise NumericalError("all observations equal mu; alpha does not depend on sigma")
    return s


def auto_grid(model, data: Dataset | None, eps: float = DEFAULT_EPS,
              size: int = DEFAULT_GRID_SIZE) -> GridSpec:
    """Grid wide enough that alpha gets within ``eps`` of its limits at both ends."""
    func, name = alpha_function(model, data)
    if name == "mu":
        centre = float(np.mean(data.x))
        half = 4.0 * model.sigma / math.sqrt(len(data))
        while func(centre + half) < 1 - eps or func(centre - half) < 1 - eps:
            half *= 2.0
        return GridSpec(centre - half, centre + half, size)
    if name == "sigma":
        # alpha falls from 1 (sigma -> 0) to 0 (sigma -> inf)
        scale = math.sqrt(_require_spread(data, model.mu) / len(data))
        lo, hi = scale / 4.0, scale * 4.0
        while func(lo) < 1 - eps:
            lo /= 2.0
        while func(hi) > eps:
            hi *= 2.0
        return GridSpec(lo, hi, size, "log")
    return GridSpec(0.0, 1.0, size)


def build_alpha_curve(model, data: Dataset | None = None, grid_spec: GridSpec | None = None,
                      eps: float = DEFAULT_EPS) -> AlphaCurve:
    """Sample alpha for a one-parameter model and split it into monotone segments.

    Raises
    ------
    GridTooCoarseError
        If a monotone segment holds fewer than three grid points.
    """
    func, name = alpha_function(model, data)
    spec = grid_spec or auto_grid(model, data, eps)
    # binomial alpha jumps when the ranking of counts changes; short runs are genuine
    min_points = 2 if isinstance(model, BinomialSpec) else 3
    return AlphaCurve.from_function(func, spec.points(), name, min_points=min_points)


@dataclass
class _RootTable:
    levels: np.ndarray
    # per monotone segment: boolean mask over levels and the roots for those levels
    hits: list[tuple[np.ndarray, np.ndarray]]

    def counts(self) -> np.ndarray:
        n = np.zeros(self.levels.size, dtype=int)
        for mask, _ in self.hits:
            n += mask
        return n


def _bisect_segment(curve: AlphaCurve, s: int, e: int, levels: np.ndarray):
    xs = curve.grid[s : e + 1]
    al = curve.alpha[s : e + 1]
    increasing = al[-1] > al[0]
    if not increasing:
        xs, al = xs[::-1], al[::-1]
    mask = (levels > al[0]) & (levels <= al[-1])
    if not mask.any():
        return mask, np.empty(0)
    lv = levels[mask]
    idx = np.searchsorted(al, lv, side="left")
    lo, hi = xs[idx - 1].copy(), xs[idx].copy()
    tol = ROOT_RTOL * curve.span
    # lo maps below the level and hi at or above it, in "increasing" orientation
    while np.max(np.abs(hi - lo)) > tol:
        mid = 0.5 * (lo + hi)
        below = np.asarray(curve.func(mid)) < lv
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return mask, 0.5 * (lo + hi)


def _root_table(curve: AlphaCurve, levels: np.ndarray) -> _RootTable:
    return _RootTable(levels, [_bisect_segment(curve, s, e, levels) for s, e in curve.segments])


def level_solutions(curve: AlphaCurve, level: float) -> LevelSolutions:
    """All parameter values (one per bracketing monotone segment) with alpha == level."""
    if not 0.0 < level < 1.0:
        raise DomainError("level must lie in (0, 1)")
    table = _root_table(curve, np.array([float(level)]))
    roots = sorted(float(r[0]) for m, r in table.hits if m[0])
    return LevelSolutions(float(level), tuple(roots))


def midpoint_levels(count: int) -> np.ndarray:
    return (np.arange(count) + 0.5) / count


def _level_averages(table: _RootTable, observable: Observable):
    n = table.counts()
    total = np.zeros(table.levels.size)
    total2 = np.zeros(table.levels.size)
    for mask, roots in table.hits:
        if roots.size:
            vals = np.asarray(observable(roots), dtype=float)
            vals = np.broadcast_to(vals, roots.shape)
            if not np.all(np.isfinite(vals)):
                raise NumericalError("observable is not finite at a level solution")
            total[mask] += vals
            total2[mask] += vals * vals
    keep = n > 0
    return n, total[keep] / n[keep], total2[keep] / n[keep]


def cwe_expect_alpha_space(curve: AlphaCurve, observable: Observable,
                           levels: int = DEFAULT_LEVELS) -> EstimateReport:
    """Equal-confidence weighted expectation of ``observable`` over the curve's parameter.

    Uses ``levels`` midpoint confidence levels.  At each level the observable
    is averaged over the ``N`` solutions; levels with ``N = 0`` are excluded
    and ``K`` is the fraction of levels that remain.  ``spread`` is the
    standard deviation ``sqrt(<O^2> - <O>^2)`` under the same weighting.
    """
    if levels < 100:
        raise DomainError("need at least 100 confidence levels")
    table = _root_table(curve, midpoint_levels(levels))
    n, avg, avg2 = _level_averages(table, observable)
    if avg.size == 0:
        raise NumericalError("no confidence level has a solution on this grid")
    mean = float(np.mean(avg))
    var = float(np.mean(avg2)) - mean * mean
    return EstimateReport(
        method="cwe-alpha-space",
        estimate=mean,
        spread=math.sqrt(max(var, 0.0)),
        K=avg.size / levels,
        config={
            "levels": levels,
            "grid": {"lower": float(curve.grid[0]), "upper": float(curve.grid[-1]),
                     "size": int(curve.grid.size)},
            "root_rtol": ROOT_RTOL,
        },
        diagnostics={
            "parameter": curve.parameter,
            "alpha_min": float(curve.alpha.min()),
            "alpha_ends": [float(curve.alpha[0]), float(curve.alpha[-1])],
            "segments": len(curve.segments),
            "max_solutions": int(n.max()),
        },
    )


def weight_normal_mu(data: Dataset, mu, sigma: float):
    """Closed-form weight over the mean, constants dropped.

    ``w(mu) = t^((n-1)/2) * p(x | mu)`` with ``t = sum (x_i - mu)^2 / (2 sigma^2)``.
    For a single observation the power vanishes and the weight is the
    likelihood itself.  For several observations with nonzero spread this
    differs from the alpha slope; see :func:`alpha_slope_mu`.
    """
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    x = data.x
    n = len(x)
    t = gaussian_t(data, mu, sigma)
    loglik = -0.5 * n * math.log(2 * math.pi) - n * math.log(sigma) - t
    with np.errstate(divide="ignore"):
        out = np.exp(0.5 * (n - 1) * np.log(t) + loglik) if n > 1 else np.exp(loglik)
    return float(out) if np.ndim(out) == 0 else out


def alpha_slope_mu(data: Dataset, mu, sigma: float):
    """``|d alpha / d mu|`` computed from the incomplete-gamma closed form."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    n = len(data)
    s = 0.5 * n
    t = gaussian_t(data, mu, sigma)
    dt = n * np.abs(np.mean(data.x) - np.asarray(mu, dtype=float)) / sigma**2
    with np.errstate(divide="ignore", invalid="ignore"):
        dens = np.exp((s - 1) * np.log(t) - t - math.lgamma(s))
        out = np.where(dt == 0, 0.0, dens * dt)
    return float(out) if np.ndim(out) == 0 else out


def weight_normal_sigma(data: Dataset, sigma, mu: float):
    """Weight over the standard deviation, normalized to unit total mass.

    ``w(sigma) = (sqrt(2 pi) sigma)^n / Gamma(n/2) * t^(n/2 - 1) * |dt/dsigma| * p(x | sigma)``
    with ``t = sum (x_i - mu)^2 / (2 sigma^2)``.  This equals ``|d alpha / d sigma|``
    and reduces to ``2 |x_1 - mu| / sigma * p(x_1 | sigma)`` for one observation.

    Raises
    ------
    NumericalError
        If every observation equals ``mu``.
    """
    _require_spread(data, mu)
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise DomainError("sigma must be positive")
    n = len(data)
    t = gaussian_t(data, mu, sigma)
    # the (sqrt(2 pi) sigma)^n prefactor cancels the normalization of p(x | sigma)
    out = 2.0 * np.exp(0.5 * n * np.log(t) - t - math.lgamma(0.5 * n)) / sigma
    return float(out) if out.ndim == 0 else out


def _normal_pdf(x, mu, sigma):
    return np.exp(-0.5 * ((x - mu) / sigma) ** 2) / (math.sqrt(2 * math.pi) * sigma)


def _quad(f, lo, hi, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(f, lo, hi, points=points, limit=500,
                                    epsabs=1e-13, epsrel=1e-10)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"quadrature did not converge: {exc}") from exc
    return val


def _closed_weight_predictive(model: GaussianSpec, data: Dataset, x2: float) -> float:
    if model.free == "mu":
        sigma = model.sigma
        xbar = float(np.mean(data.x))
        width = 40.0 * sigma
        lo, hi = xbar - width, xbar + width
        pts = sorted({xbar, min(max(x2, lo), hi)} - {lo, hi})
        w = lambda m: weight_normal_mu(data, m, sigma)
        norm = _quad(w, lo, hi, pts)
        num = _quad(lambda m: _normal_pdf(x2, m, sigma) * w(m), lo, hi, pts)
        return num / norm
    mu = model.mu
    s_scale = math.log(math.sqrt(_require_spread(data, mu) / len(data)))
    lo, hi = s_scale - 25.0, s_scale + 45.0
    pts = [s_scale]
    if x2 != mu:
        pts.append(min(max(math.log(abs(x2 - mu)), lo + 1), hi - 1))
    pts = sorted(set(pts))
    # integrate over log sigma
    w = lambda s: weight_normal_sigma(data, math.exp(s), mu) * math.exp(s)
    norm = _quad(w, lo, hi, pts)
    num = _quad(lambda s: _normal_pdf(x2, mu, math.exp(s)) * w(s), lo, hi, pts)
    return num / norm


def predictive_density(model: GaussianSpec, data: Dataset, x2, method: str = "closed_weight",
                       levels: int = DEFAULT_LEVELS, curve: AlphaCurve | None = None):
    """Confidence-weighted predictive density of a new observation ``x2``.

    ``method`` is ``"closed_weight"`` (quadrature over the parameter with the
    closed-form weight, normalized by its total mass) or ``"alpha_space"``
    (level-by-level average of ``p(x2 | tau)``).
    """
    if not isinstance(model, GaussianSpec):
        raise TypeError("predictive_density supports the Gaussian families")
    x2_arr = np.atleast_1d(np.asarray(x2, dtype=float))
    if method == "closed_weight":
        out = np.array([_closed_weight_predictive(model, data, float(v)) for v in x2_arr])
    elif method == "alpha_space":
        curve = curve or build_alpha_curve(model, data)
        table = _root_table(curve, midpoint_levels(levels))
        out = np.empty(x2_arr.size)
        for i, v in enumerate(x2_arr):
            if model.free == "mu":
                obs = lambda m, v=v: _normal_pdf(v, m, model.sigma)
            else:
                obs = lambda s, v=v: _normal_pdf(v, model.mu, s)
            _, avg, _ = _level_averages(table, obs)
            out[i] = np.mean(avg)
    else:
        raise DomainError(f"unknown method {method!r}")
    if np.any(out < 0) or not np.all(np.isfinite(out)):
        raise NumericalError("predictive density is not a finite nonnegative value")
    return float(out[0]) if np.ndim(x2) == 0 else out


def confidence_interval_table(sigma: float, x1: float,
                              levels: Sequence[float]) -> list[tuple[float, float, float]]:
    """Central intervals for the mean of a normal with known ``sigma`` from one point ``x1``."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    rows = []
    for level in levels:
        level = float(level)
        if not 0.0 <= level < 1.0:
            raise DomainError(f"confidence level must lie in [0, 1), got {level}")
        half = sigma * normal_quantile(0.5 * (1.0 + level))
        rows.append((level, x1 - half, x1 + half))
    return rows
