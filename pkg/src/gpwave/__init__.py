"""Generalized plane wave bases for the 2D scalar wave equation.

Subpackage map: :mod:`gpwave.poly2` (truncated bivariate polynomial algebra),
:mod:`gpwave.gpw` (shape-function design and Taylor tables),
:mod:`gpwave.special` (Airy reference solution and coefficient fields),
:mod:`gpwave.interp` (local fits and disk-convergence studies),
:mod:`gpwave.uwvf` (ultra weak variational formulation solver),
:mod:`gpwave.cli` (command-line front end).
"""

from . import errors
from .gpw import (
    CoefficientField,
    Gpw,
    Normalization,
    TaylorTable,
    basis_set,
    design_gpw,
    plane_wave_basis,
)
from .poly2 import TruncatedPoly2, exp_laplacian_ratio
from .special import airy_ai, airy_plane_solution, field_affine, field_constant

__version__ = "0.1.0"

__all__ = [
    "errors",
    "CoefficientField",
    "Gpw",
    "Normalization",
    "TaylorTable",
    "basis_set",
    "design_gpw",
    "plane_wave_basis",
    "TruncatedPoly2",
    "exp_laplacian_ratio",
    "airy_ai",
    "airy_plane_solution",
    "field_affine",
    "field_constant",
    "__version__",
]
