"""Classical comparison estimators: least squares, flat-prior Bayes, and the vase example."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DomainError, NumericalError
from .models import Dataset, linear_t

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

BAYES_RESOLUTION = 2001


@dataclass(frozen=True)
class LsqFit:
    a: float
    b: float
    cov_ab: np.ndarray
    rss: float

    @property
    def sigma_a(self) -> float:
        return math.sqrt(self.cov_ab[0, 0])

    @property
    def sigma_b(self) -> float:
        return math.sqrt(self.cov_ab[1, 1])


def lsq_fit(data: Dataset, sigma: float = 1.0) -> LsqFit:
    """Ordinary least squares for ``y = a x + b`` with known noise ``sigma``.

    The covariance is ``sigma^2 (X^T X)^-1`` for the design ``X = [x, 1]``.
    """
    if not data.is_pairs or len(data) < 2:
        raise DomainError("least squares needs at least two (x, y) pairs")
    x, y = data.x, data.y
    gram = np.array([[x @ x, x.sum()], [x.sum(), float(len(x))]])
    det = gram[0, 0] * gram[1, 1] - gram[0, 1] ** 2
    if det <= 1e-12 * gram[0, 0] * gram[1, 1]:
        raise NumericalError("singular design matrix (all x equal)")
    rhs = np.array([x @ y, y.sum()])
    inv = np.array([[gram[1, 1], -gram[0, 1]], [-gram[1, 0], gram[0, 0]]]) / det
    a, b = inv @ rhs
    resid = a * x + b - y
    return LsqFit(float(a), float(b), sigma**2 * inv, float(resid @ resid))


def delta_method_sigma_v(fit: LsqFit) -> float:
    """First-order error of ``V = (1 + |b|)^2``: ``2 (1 + |b|) sigma_b``.

    Raises
    ------
    DomainError
        At ``b == 0`` where ``|b|`` has no derivative.
    """
    if fit.b == 0.0:
        raise DomainError("V is not differentiable at b = 0")
    return 2.0 * (1.0 + abs(fit.b)) * fit.sigma_b


def bayes_flat_expect(data: Dataset, sigma: float, bounds, observable: Field,
                      resolution: int = BAYES_RESOLUTION) -> tuple[float, float]:
    """Posterior mean and standard deviation of ``observable(a, b)`` under a flat box prior.

    ``bounds`` is ``(lo, hi)`` applied to both parameters or
    ``((a_lo, a_hi), (b_lo, b_hi))``.  Tensor-product trapezium rule with the
    likelihood shifted by its maximum before exponentiation.
    """
    bounds = np.asarray(bounds, dtype=float)
    (a_lo, a_hi), (b_lo, b_hi) = (bounds, bounds) if bounds.ndim == 1 else bounds
    if not all(map(math.isfinite, (a_lo, a_hi, b_lo, b_hi))) or a_lo >= a_hi or b_lo >= b_hi:
        raise DomainError("prior box must be finite and non-empty")
    a = np.linspace(a_lo, a_hi, resolution)
    b = np.linspace(b_lo, b_hi, resolution)
    wa = np.full(resolution, 1.0)
    wa[[0, -1]] = 0.5
    A, B = np.meshgrid(a, b, indexing="ij")
    logl = -linear_t(data, A, B, sigma)
    w = np.exp(logl - logl.max()) * np.outer(wa, wa)
    f = np.broadcast_to(np.asarray(observable(A, B), dtype=float), A.shape)
    z = w.sum()
    if not (np.isfinite(z) and z > 0) or not np.all(np.isfinite(f)):
        raise NumericalError("posterior quadrature failed")
    mean = float(np.sum(w * f) / z)
    var = float(np.sum(w * f * f) / z) - mean**2
    return mean, math.sqrt(max(var, 0.0))


@dataclass(frozen=True)
class VaseResult:
    most_likely_p_blue: Fraction
    expected_p_blue: Fraction
    per_vase_posterior: tuple[Fraction, ...]


def vase_demo() -> VaseResult:
    """Ten vases holding 91..100 red balls out of 100; one red ball is drawn.

    With a uniform prior over vases the posterior is proportional to the red
    fraction.  Exact rational arithmetic throughout.
    """
    reds = range(91, 101)
    likelihood = [Fraction(r, 100) for r in reds]
    total = sum(likelihood)
    posterior = tuple(l / total for l in likelihood)
    blue = [Fraction(100 - r, 100) for r in reds]
    expected = sum(p * q for p, q in zip(posterior, blue))
    best = max(range(10), key=lambda i: posterior[i])
    return VaseResult(blue[best], expected, posterior)
