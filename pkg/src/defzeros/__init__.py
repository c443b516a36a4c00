"""Zeros of random Kostlan polynomials on curves and surfaces in real projective space.

The package samples Kostlan polynomials, counts their zeros (and zero-curve
components and critical points) on curves and surfaces, compares the counts
with Kac-Rice predictions, and builds curves that carry prescribed numbers
of transversal zeros for a staged family of polynomials.
"""
from .errors import (ChartOverflow, ConstructionFailure, DefZerosError, DegenerateInput,
                     InvalidArgument, RefinementFailure, ResolutionFailure)
from .poly import AffinePolynomial, HomogeneousPolynomial, sample_kostlan

__version__ = "0.1.0"

__all__ = [
    "AffinePolynomial", "HomogeneousPolynomial", "sample_kostlan",
    "ChartOverflow", "ConstructionFailure", "DefZerosError", "DegenerateInput",
    "InvalidArgument", "RefinementFailure", "ResolutionFailure",
]
