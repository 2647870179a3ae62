"""Desk-scale calculus of self-adjoint extension parametrisations for
half-line Schrodinger operators, built on an exact exponential-polynomial
function class."""

from .exppoly import ExpPoly, apply_shifted, inner_product, solve_resolvent
from .models import (HilbertElement, element, make_friedrichs_extension,
                     make_halfline_model, make_salpha_extension,
                     make_twohalflines_model)

__all__ = [
    "ExpPoly", "apply_shifted", "inner_product", "solve_resolvent",
    "HilbertElement", "element", "make_halfline_model",
    "make_twohalflines_model", "make_friedrichs_extension",
    "make_salpha_extension",
]

__version__ = "0.1.0"
