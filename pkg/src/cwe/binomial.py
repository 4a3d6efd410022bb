"""Confidence-weighted predictive counts for a binomial bin.

Alpha for the binomial is piecewise smooth with jumps wherever two counts
swap places in the probability ranking.  The default weight measure is the
total variation ``|delta alpha|`` between neighbouring points of a uniform
``p`` grid, which integrates the jumps consistently.  The alternative
``strict_alpha_space`` route averages over level solutions including the
``1/N`` factor of the general definition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError
from .models import BinomialSpec, alpha_binomial, binomial_pmf_table
from .univariate import (
    DEFAULT_LEVELS,
    GridSpec,
    _level_averages,
    _root_table,
    build_alpha_curve,
    midpoint_levels,
)

DEFAULT_P_GRID = 20001


@dataclass(frozen=True)
class BinomialPrediction:
    k_observed: int
    n: int
    predictive_pmf: np.ndarray
    expected_count: float
    std_param: float
    std_predictive: float
    most_likely_count: int
    fisher_std: float
    K: float = 1.0
    diagnostics: dict[str, Any] = field(default_factory=dict)

    def csv_row(self) -> list:
        return [self.k_observed, self.most_likely_count, self.fisher_std,
                self.expected_count, self.std_param]


def most_likely_count(k1: int, n: int) -> tuple[int, float]:
    """Maximum-likelihood count and its Fisher-information standard deviation."""
    BinomialSpec(n, k1)
    p_hat = k1 / n
    return k1, math.sqrt(n * p_hat * (1.0 - p_hat))


def binomial_predictive(k1: int, n: int, p_grid_size: int = DEFAULT_P_GRID,
                        strict_alpha_space: bool = False,
                        levels: int = DEFAULT_LEVELS) -> BinomialPrediction:
    """Predictive distribution of the count in a new batch of ``n`` given ``k1`` observed.

    Returns the predictive pmf over ``0..n`` together with its mean
    (``expected_count``), ``std_param`` (``n`` times the weighted standard
    deviation of ``p``) and ``std_predictive`` (standard deviation of the
    predictive count).
    """
    BinomialSpec(n, k1)
    if p_grid_size < 2001:
        raise DomainError("p_grid_size must be at least 2001")
    if strict_alpha_space:
        pmf, mean_p, mean_p2, K, diag = _strict(k1, n, p_grid_size, levels)
    else:
        pmf, mean_p, mean_p2, K, diag = _total_variation(k1, n, p_grid_size)
    counts = np.arange(n + 1)
    expected = float(np.sum(counts * pmf))
    var_pred = float(np.sum(counts**2 * pmf)) - expected**2
    var_p = max(mean_p2 - mean_p**2, 0.0)
    ml, fisher = most_likely_count(k1, n)
    diag.update(p_grid_size=p_grid_size, weight="strict-alpha-space" if strict_alpha_space
                else "total-variation")
    return BinomialPrediction(
        k_observed=k1,
        n=n,
        predictive_pmf=pmf,
        expected_count=expected,
        std_param=n * math.sqrt(var_p),
        std_predictive=math.sqrt(max(var_pred, 0.0)),
        most_likely_count=ml,
        fisher_std=fisher,
        K=K,
        diagnostics=diag,
    )


def _total_variation(k1, n, size):
    p = np.linspace(0.0, 1.0, size)
    alpha = alpha_binomial(k1, n, p)
    w = np.abs(np.diff(alpha))
    w = w / w.sum()
    mid = 0.5 * (p[1:] + p[:-1])
    pmf = w @ binomial_pmf_table(n, mid)
    pmf = pmf / pmf.sum()
    diag = {"alpha_total_variation": float(np.abs(np.diff(alpha)).sum())}
    return pmf, float(w @ mid), float(w @ mid**2), 1.0, diag


def _strict(k1, n, size, levels):
    curve = build_alpha_curve(BinomialSpec(n, k1), None, GridSpec(0.0, 1.0, size))
    table = _root_table(curve, midpoint_levels(levels))
    pmf = np.empty(n + 1)
    for k2 in range(n + 1):
        _, avg, _ = _level_averages(table, lambda p, k2=k2: binomial_pmf_table(n, p)[..., k2])
        pmf[k2] = avg.mean()
    _, m1, m2 = _level_averages(table, lambda p: p)
    nonempty = int(np.count_nonzero(table.counts()))
    pmf = pmf / pmf.sum()
    diag = {"levels": levels, "segments": len(curve.segments)}
    return pmf, float(m1.mean()), float(m2.mean()), nonempty / levels, diag
