"""Special functions, quadrature and contour machinery."""

from .contour import Polyline, ScalarGrid2D, marching_squares, polyline_integral
from .integrate import trapezoid_integrate
from .special import (
    normal_cdf,
    normal_pdf,
    normal_quantile,
    reg_lower_gamma,
    reg_upper_gamma,
)

__all__ = [
    "Polyline",
    "ScalarGrid2D",
    "marching_squares",
    "normal_cdf",
    "normal_pdf",
    "normal_quantile",
    "polyline_integral",
    "reg_lower_gamma",
    "reg_upper_gamma",
    "trapezoid_integrate",
]
