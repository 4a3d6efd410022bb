"""Composite trapezium rule."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError


def trapezoid_integrate(xs, ys) -> float:
    """Composite trapezium rule over strictly increasing abscissae.

    >>> trapezoid_integrate([0, 1, 2], [0, 1, 2])
    2.0
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise DomainError("xs and ys must be 1-D arrays of equal length")
    if xs.size < 2:
        raise DomainError("need at least two points")
    dx = np.diff(xs)
    if np.any(dx <= 0):
        raise DomainError("xs must be strictly increasing")
    return float(np.sum(0.5 * dx * (ys[1:] + ys[:-1])))
