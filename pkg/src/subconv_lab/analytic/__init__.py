"""Test functions, Mellin transforms, gamma factors, G-transforms, the delta symbol and Voronoi."""

from .contour import ContourSpec, G_transform, G_transform_detailed, LineSamples, line_samples
from .delta import delta_eval, delta_weights, farey_pairs
from .gamma import GammaFactorEngine, gamma_factor, stirling_magnitude
from .mellin import mellin, mellin_gauss_legendre, mellin_line_fft, mellin_u_trapezoid
from .oscillatory import (
    TwistSetup,
    J_factor,
    I_reference_bound,
    istar_evaluator,
    oscillatory_integral_I,
    oscillatory_integral_Ihat,
    oscillatory_integral_Ihat_2d,
    oscillatory_integral_Istar,
)
from .testfunctions import U, V, VSTAR, Modulated, TestFunctionSpec, bump, eval_test_function, inner_x_integral, kernel_W
from .voronoi import VoronoiResult, polar_term_d3, voronoi_check, voronoi_dual_levels, voronoi_lhs

__all__ = [
    "ContourSpec", "G_transform", "G_transform_detailed", "LineSamples", "line_samples",
    "delta_eval", "delta_weights", "farey_pairs",
    "GammaFactorEngine", "gamma_factor", "stirling_magnitude",
    "mellin", "mellin_gauss_legendre", "mellin_line_fft", "mellin_u_trapezoid",
    "TwistSetup", "J_factor", "I_reference_bound", "istar_evaluator", "oscillatory_integral_I",
    "oscillatory_integral_Ihat", "oscillatory_integral_Ihat_2d", "oscillatory_integral_Istar",
    "U", "V", "VSTAR", "Modulated", "TestFunctionSpec", "bump", "eval_test_function", "inner_x_integral", "kernel_W",
    "VoronoiResult", "polar_term_d3", "voronoi_check", "voronoi_dual_levels", "voronoi_lhs",
]
