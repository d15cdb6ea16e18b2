"""
Numeric checks

Generators bound to explicit functions of (z, z̄), vectorized evaluation on a
sample patch, and the h-scaling of the curvature of truncated connections.
"""

from .binding import BoundFunction, PolyTerm, SampleBinding, grid_patch
from .evaluate import PatchEvaluator, evaluate
from .scaling import fit_slope, residual_scaling, rule_residuals, system_connection

__all__ = [
    "BoundFunction",
    "PatchEvaluator",
    "PolyTerm",
    "SampleBinding",
    "evaluate",
    "fit_slope",
    "grid_patch",
    "residual_scaling",
    "rule_residuals",
    "system_connection",
]
