"""Two-parameter confidence-weighted expectations via equal-alpha contours.

With two free parameters each confidence level is solved by a curve rather
than a finite set of points, so the ``1/N`` sum is replaced by the arclength
average of the observable along the level contour.  The result is the mean of
these contour averages over uniformly spaced confidence levels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NumericalError
from .models import Dataset, alpha_gaussian, linear_t
from .numerics.contour import Polyline, ScalarGrid2D, marching_squares, polyline_integral

Field = Callable[[np.ndarray, np.ndarray], np.ndarray]

DEFAULT_BOUNDS = (-10.0, 10.0)
DEFAULT_RESOLUTION = 801
DEFAULT_LEVELS = 200


@dataclass(frozen=True)
class ContourSet:
    level: float
    polylines: tuple[Polyline, ...]

    @property
    def closed_flags(self) -> tuple[bool, ...]:
        return tuple(p.closed for p in self.polylines)


@dataclass(frozen=True)
class ContourEstimate:
    value: float
    spread: float
    K: float
    levels_used: int
    boundary_clipped_fraction: float


def alpha_grid_linfit(data: Dataset, sigma: float = 1.0, bounds_a=DEFAULT_BOUNDS,
                      bounds_b=DEFAULT_BOUNDS, resolution=DEFAULT_RESOLUTION) -> ScalarGrid2D:
    """Alpha of the line ``y = a x + b`` sampled on an ``(a, b)`` grid.

    Raises
    ------
    DomainError
        With fewer than two points, all ``x`` equal, or non-positive ``sigma``.
    """
    if not data.is_pairs or len(data) < 2:
        raise DomainError("a line fit needs at least two (x, y) pairs")
    if np.ptp(data.x) == 0:
        raise DomainError("degenerate design: all x values are equal")
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    n = len(data)
    return ScalarGrid2D.from_function(
        lambda A, B: alpha_gaussian(linear_t(data, A, B, sigma), n),
        bounds_a, bounds_b, resolution,
    )


def v_quantity(b):
    """The observable ``(1 + |b|)^2``."""
    out = (1.0 + np.abs(np.asarray(b, dtype=float))) ** 2
    return float(out) if out.ndim == 0 else out


def contour_set(grid: ScalarGrid2D, level: float) -> ContourSet:
    return ContourSet(float(level), tuple(marching_squares(grid, level)))


def contour_average(polylines, observable: Field) -> tuple[float, float, float]:
    """Arclength average of ``observable`` over several polylines.

    Returns ``(average, total_length, open_length)``.
    """
    total = length = open_length = 0.0
    for poly in polylines:
        integral, seg_len = polyline_integral(poly, observable)
        total += integral
        length += seg_len
        if not poly.closed:
            open_length += seg_len
    if length == 0.0:
        raise NumericalError("contour has zero length")
    return total / length, length, open_length


def cwe_contour_expect(grid: ScalarGrid2D, observable: Field,
                       levels: int = DEFAULT_LEVELS) -> ContourEstimate:
    """Mean of equal-alpha contour averages over ``levels`` midpoint confidence levels.

    Levels with no contour on the grid are skipped; ``K`` is the fraction that
    remains.  ``spread`` is ``sqrt(<f^2> - <f>^2)`` with ``<f^2>`` built the
    same way.  Contours cut by the grid boundary are used as they are and their
    share of the total length is reported.
    """
    if levels < 100:
        raise DomainError("need at least 100 confidence levels")
    na, nb = grid.resolution
    if na < 201 or nb < 201:
        raise DomainError("grid resolution must be at least 201x201")

    avgs, avgs2 = [], []
    total_len = open_len = 0.0
    for level in (np.arange(levels) + 0.5) / levels:
        polys = marching_squares(grid, level)
        if not polys:
            continue
        m1, length, opened = contour_average(polys, observable)
        m2, _, _ = contour_average(polys, lambda a, b: np.asarray(observable(a, b)) ** 2)
        avgs.append(m1)
        avgs2.append(m2)
        total_len += length
        open_len += opened
    if not avgs:
        raise NumericalError("no confidence level has a contour on this grid")
    value = float(np.mean(avgs))
    var = float(np.mean(avgs2)) - value * value
    return ContourEstimate(
        value=value,
        spread=math.sqrt(max(var, 0.0)),
        K=len(avgs) / levels,
        levels_used=len(avgs),
        boundary_clipped_fraction=open_len / total_len,
    )
