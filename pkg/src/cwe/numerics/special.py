"""Regularized incomplete gamma functions and the standard normal distribution.

The incomplete gamma functions follow the classical split: the power series
for ``x < s + 1`` and a modified-Lentz continued fraction otherwise.  Both are
vectorized over ``x`` (and ``s``) so that whole parameter grids can be
evaluated at once.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError, NumericalError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 10_000

_lgamma = np.frompyfunc(math.lgamma, 1, 1)
_erfc = np.vectorize(math.erfc, otypes=[float])


def _check_gamma_args(s, x):
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    if not (np.all(np.isfinite(s)) and np.all(np.isfinite(x))):
        raise DomainError("incomplete gamma arguments must be finite")
    if np.any(s <= 0):
        raise DomainError("incomplete gamma requires s > 0")
    if np.any(x < 0):
        raise DomainError("incomplete gamma requires x >= 0")
    return np.broadcast_arrays(s, x)


def _log_prefactor(s, x):
    # log(x^s e^-x / Gamma(s)), with x > 0
    return s * np.log(x) - x - _lgamma(s).astype(float)


def _lower_series(s, x):
    """P(s, x) by the power series; accurate for x < s + 1."""
    ap = s.copy()
    term = 1.0 / s
    total = term.copy()
    active = np.ones(s.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        ap = ap + 1.0
        term = np.where(active, term * x / ap, 0.0)
        total = total + term
        active &= np.abs(term) >= np.abs(total) * _EPS
        if not active.any():
            break
    else:
        raise NumericalError("incomplete gamma series did not converge")
    return total * np.exp(_log_prefactor(s, x))


def _upper_fraction(s, x):
    """Q(s, x) by the continued fraction (modified Lentz); for x >= s + 1."""
    b = x + 1.0 - s
    c = np.full(s.shape, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(s.shape, dtype=bool)
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = np.where(active, d * c, 1.0)
        h = h * delta
        active &= np.abs(delta - 1.0) >= _EPS
        if not active.any():
            break
    else:
        raise NumericalError("incomplete gamma continued fraction did not converge")
    return h * np.exp(_log_prefactor(s, x))


def _split(s, x, want_upper):
    s, x = _check_gamma_args(s, x)
    scalar = s.ndim == 0
    s = np.atleast_1d(s).astype(float)
    x = np.atleast_1d(x).astype(float)
    out = np.empty(s.shape)

    zero = x == 0
    out[zero] = 1.0 if want_upper else 0.0

    series = (~zero) & (x < s + 1.0)
    if series.any():
        p = _lower_series(s[series], x[series])
        out[series] = 1.0 - p if want_upper else p

    frac = (~zero) & ~series
    if frac.any():
        q = _upper_fraction(s[frac], x[frac])
        out[frac] = q if want_upper else 1.0 - q

    np.clip(out, 0.0, 1.0, out=out)
    return float(out[0]) if scalar else out


def reg_upper_gamma(s, x):
    """Regularized upper incomplete gamma function ``Q(s, x) = Gamma(s, x) / Gamma(s)``.

    Parameters
    ----------
    s : float or array_like
        Shape parameter, strictly positive.
    x : float or array_like
        Lower integration limit, nonnegative.

    Returns
    -------
    float or ndarray
        Values in ``[0, 1]``; a float when both inputs are scalars.

    Raises
    ------
    DomainError
        If ``s <= 0``, ``x < 0`` or any input is not finite.
    """
    return _split(s, x, want_upper=True)


def reg_lower_gamma(s, x):
    """Regularized lower incomplete gamma function ``P(s, x) = 1 - Q(s, x)``.

    Computed directly (not as ``1 - Q``) so that small values keep full
    relative precision.
    """
    return _split(s, x, want_upper=False)


def normal_cdf(z):
    """Standard normal cumulative distribution function."""
    z = np.asarray(z, dtype=float)
    out = 0.5 * _erfc(-z / math.sqrt(2.0))
    return float(out) if out.ndim == 0 else out


def normal_pdf(z):
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    return float(out) if out.ndim == 0 else out


# Acklam's rational approximation, used as the starting point for Halley steps.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _acklam(q: float) -> float:
    if q < _P_LOW:
        r = math.sqrt(-2.0 * math.log(q))
        return ((((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5])
                / ((((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0))
    if q > 1.0 - _P_LOW:
        return -_acklam(1.0 - q)
    r = q - 0.5
    t = r * r
    return ((((((_A[0] * t + _A[1]) * t + _A[2]) * t + _A[3]) * t + _A[4]) * t + _A[5]) * r
            / (((((_B[0] * t + _B[1]) * t + _B[2]) * t + _B[3]) * t + _B[4]) * t + 1.0))


def normal_quantile(q: float) -> float:
    """Inverse of the standard normal CDF.

    Raises
    ------
    DomainError
        Unless ``0 < q < 1``.
    """
    q = float(q)
    if not (0.0 < q < 1.0):
        raise DomainError(f"normal_quantile requires 0 < q < 1, got {q!r}")
    z = _acklam(q)
    for _ in range(2):
        # Halley refinement on the tail that keeps the residual well conditioned
        if z <= 0:
            err = 0.5 * math.erfc(-z / math.sqrt(2.0)) - q
        else:
            err = (1.0 - q) - 0.5 * math.erfc(z / math.sqrt(2.0))
        u = err * math.sqrt(2.0 * math.pi) * math.exp(0.5 * z * z)
        z = z - u / (1.0 + 0.5 * z * u)
    return z
