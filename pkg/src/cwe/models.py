"""Datasets, the three model families, and the confidence level limit alpha.

For a parameter value ``tau`` the confidence level limit is the probability
mass of all synthetic datasets (same size as the observed one) that are
strictly more probable under ``tau`` than the observed data.  Closed forms are
provided for the Gaussian families (via the regularized incomplete gamma
function) and by enumeration for the binomial.  :func:`alpha_mc` estimates the
same quantity by simulation and serves as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from .errors import DomainError
from .numerics.special import reg_lower_gamma

_LOG_2PI = math.log(2.0 * math.pi)
# relative slack under which two probabilities count as tied (float noise only)
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Ordered finite observations: shape ``(n,)`` or ``(n, 2)`` for (x, y) pairs."""

    observations: np.ndarray

    def __post_init__(self):
        obs = np.asarray(self.observations, dtype=float)
        if obs.size == 0:
            raise DomainError("dataset is empty")
        if obs.ndim not in (1, 2) or (obs.ndim == 2 and obs.shape[1] != 2):
            raise DomainError("observations must be a vector or a list of (x, y) pairs")
        if not np.all(np.isfinite(obs)):
            raise DomainError("observations must be finite")
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)

    @classmethod
    def of(cls, values) -> "Dataset":
        return cls(np.asarray(values, dtype=float))

    @property
    def is_pairs(self) -> bool:
        return self.observations.ndim == 2

    @property
    def x(self) -> np.ndarray:
        return self.observations[:, 0] if self.is_pairs else self.observations

    @property
    def y(self) -> np.ndarray:
        if not self.is_pairs:
            raise DomainError("dataset has no y column")
        return self.observations[:, 1]

    def __len__(self) -> int:
        return self.observations.shape[0]


@dataclass(frozen=True)
class GaussianSpec:
    """Normal model; ``None`` marks the free parameter."""

    mu: float | None = None
    sigma: float | None = 1.0

    def __post_init__(self):
        if (self.mu is None) == (self.sigma is None):
            raise DomainError("exactly one of mu, sigma must be free (None)")
        if self.sigma is not None and not self.sigma > 0:
            raise DomainError("sigma must be positive")

    @property
    def free(self) -> str:
        return "mu" if self.mu is None else "sigma"

    def resolve(self, params: Mapping[str, float]) -> tuple[float, float]:
        mu = self.mu if self.mu is not None else params["mu"]
        sigma = self.sigma if self.sigma is not None else params["sigma"]
        if not sigma > 0:
            raise DomainError("sigma must be positive")
        return float(mu), float(sigma)


@dataclass(frozen=True)
class BinomialSpec:
    n: int
    k_observed: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("n must be a positive integer")
        if int(self.k_observed) != self.k_observed or not 0 <= self.k_observed <= self.n:
            raise DomainError("k_observed must be an integer in [0, n]")


@dataclass(frozen=True)
class LinearGaussianSpec:
    """``y = a x + b`` with known Gaussian noise ``sigma``."""

    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")


Model = Union[GaussianSpec, BinomialSpec, LinearGaussianSpec]


@dataclass(frozen=True)
class McConfig:
    samples: int = 100_000
    seed: int = 42
    shards: int = 1

    def __post_init__(self):
        if self.samples < 1000:
            raise DomainError("Monte Carlo needs at least 1000 samples")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")
        if self.shards < 1:
            raise DomainError("shards must be positive")


def _check_p(p):
    p = np.asarray(p, dtype=float)
    if np.any(~np.isfinite(p)) or np.any((p < 0) | (p > 1)):
        raise DomainError("binomial p must lie in [0, 1]")
    return p


def binomial_pmf_table(n: int, p) -> np.ndarray:
    """``pmf[..., l]`` for ``l = 0..n``, with the convention ``0**0 == 1``."""
    p = _check_p(p)[..., None]
    l = np.arange(n + 1)
    coef = np.array([math.comb(n, int(i)) for i in l], dtype=float)
    with np.errstate(under="ignore"):
        return coef * p**l * (1.0 - p) ** (n - l)


def strictly_greater(a, b):
    """``a > b`` beyond floating-point noise; exact ties and near-ties are excluded."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a > b + TIE_RTOL * np.abs(b)


def log_joint_density(model: Model, data: Dataset | None, params: Mapping[str, float]) -> float:
    """Log of the joint density (or pmf) of ``data`` under ``model`` at ``params``.

    Parameters use the names ``mu``/``sigma`` (Gaussian), ``p`` (binomial) and
    ``a``/``b`` (linear).  The binomial ignores ``data`` and uses
    ``k_observed`` from the spec.
    """
    if isinstance(model, GaussianSpec):
        mu, sigma = model.resolve(params)
        x = data.x
        return float(-0.5 * len(x) * _LOG_2PI - len(x) * math.log(sigma)
                     - np.sum((x - mu) ** 2) / (2 * sigma**2))
    if isinstance(model, BinomialSpec):
        p = float(_check_p(params["p"]))
        pmf = binomial_pmf_table(model.n, p)[model.k_observed]
        return math.log(pmf) if pmf > 0 else -math.inf
    if isinstance(model, LinearGaussianSpec):
        r = params["a"] * data.x + params["b"] - data.y
        m = len(data)
        return float(-0.5 * m * _LOG_2PI - m * math.log(model.sigma)
                     - np.sum(r * r) / (2 * model.sigma**2))
    raise TypeError(f"unsupported model {model!r}")


def alpha_gaussian(t, n: int):
    """Alpha for Gaussian likelihoods from ``t = sum of squared residuals / (2 sigma^2)``.

    The region of more probable datasets is an n-ball, so alpha is the
    regularized lower incomplete gamma function ``P(n/2, t)``, i.e.
    ``1 - Q(n/2, t)``.  Vectorized over ``t``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise DomainError("alpha_gaussian requires finite t >= 0")
    if n < 1:
        raise DomainError("n must be positive")
    out = reg_lower_gamma(0.5 * n, t)
    return out


def alpha_binomial(k: int, n: int, p):
    """Probability of all counts strictly more probable than ``k`` under ``Bin(n, p)``.

    Vectorized over ``p``.  Tied counts (e.g. the mirror count at ``p = 1/2``)
    are excluded.
    """
    if not 0 <= k <= n:
        raise DomainError("k must lie in [0, n]")
    pmf = binomial_pmf_table(n, p)
    pk = pmf[..., k : k + 1]
    out = np.sum(np.where(strictly_greater(pmf, pk), pmf, 0.0), axis=-1)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def gaussian_t(data: Dataset, mu, sigma):
    """``sum (x_i - mu)^2 / (2 sigma^2)``, vectorized over ``mu`` and ``sigma``."""
    x = data.x
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    n = len(x)
    xbar = float(np.mean(x))
    s0 = float(np.sum((x - xbar) ** 2))
    return (s0 + n * (xbar - mu) ** 2) / (2.0 * sigma**2)


def linear_t(data: Dataset, a, b, sigma: float = 1.0):
    """Residual ``t`` for the line ``y = a x + b``, vectorized over ``a`` and ``b``.

    Expanded through the sufficient statistics so that large grids need no
    per-point residual arrays.
    """
    x, y = data.x, data.y
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    m = len(x)
    sx, sy = x.sum(), y.sum()
    sxx, sxy, syy = (x * x).sum(), (x * y).sum(), (y * y).sum()
    rss = a * a * sxx + m * b * b + syy + 2 * a * b * sx - 2 * a * sxy - 2 * b * sy
    return np.maximum(rss, 0.0) / (2.0 * sigma**2)


def alpha_closed(model: Model, data: Dataset | None, params: Mapping[str, float]) -> float:
    """Closed-form alpha for any supported model at a single parameter point."""
    if isinstance(model, GaussianSpec):
        mu, sigma = model.resolve(params)
        return float(alpha_gaussian(gaussian_t(data, mu, sigma), len(data)))
    if isinstance(model, BinomialSpec):
        return alpha_binomial(model.k_observed, model.n, float(params["p"]))
    if isinstance(model, LinearGaussianSpec):
        t = linear_t(data, params["a"], params["b"], model.sigma)
        return float(alpha_gaussian(t, len(data)))
    raise TypeError(f"unsupported model {model!r}")


def _shard_sizes(total: int, shards: int) -> list[int]:
    base, extra = divmod(total, shards)
    return [base + (i < extra) for i in range(shards)]


def alpha_mc(model: Model, data: Dataset | None, params: Mapping[str, float],
             mc: McConfig = McConfig()) -> tuple[float, float]:
    """Monte Carlo estimate of alpha and its binomial standard error.

    Synthetic datasets are drawn from the model at ``params``; alpha is the
    fraction whose joint density strictly exceeds that of the observed data.
    Each shard draws from its own PCG64 substream spawned from ``mc.seed``,
    so results are bit-stable for a fixed shard count.
    """
    streams = np.random.SeedSequence(mc.seed).spawn(mc.shards)
    hits = 0
    for ss, size in zip(streams, _shard_sizes(mc.samples, mc.shards)):
        rng = np.random.Generator(np.random.PCG64(ss))
        hits += _mc_hits(model, data, params, rng, size)
    alpha_hat = hits / mc.samples
    stderr = math.sqrt(alpha_hat * (1.0 - alpha_hat) / mc.samples)
    return alpha_hat, stderr


def _mc_hits(model, data, params, rng: np.random.Generator, size: int) -> int:
    if isinstance(model, GaussianSpec):
        mu, sigma = model.resolve(params)
        x = data.x
        y = rng.normal(mu, sigma, size=(size, len(x)))
        # compare log densities; the common normalization cancels
        observed = -np.sum((x - mu) ** 2) / (2 * sigma**2)
        synthetic = -np.sum((y - mu) ** 2, axis=1) / (2 * sigma**2)
        return int(np.count_nonzero(synthetic > observed))
    if isinstance(model, BinomialSpec):
        p = float(_check_p(params["p"]))
        pmf = binomial_pmf_table(model.n, p)
        draws = rng.binomial(model.n, p, size=size)
        return int(np.count_nonzero(strictly_greater(pmf[draws], pmf[model.k_observed])))
    if isinstance(model, LinearGaussianSpec):
        x, yobs = data.x, data.y
        line = params["a"] * x + params["b"]
        y = rng.normal(line, model.sigma, size=(size, len(x)))
        observed = -np.sum((yobs - line) ** 2)
        synthetic = -np.sum((y - line) ** 2, axis=1)
        return int(np.count_nonzero(synthetic > observed))
    raise TypeError(f"unsupported model {model!r}")
