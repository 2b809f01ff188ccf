"""Lie point symmetries, similarity reductions and closed-form checks for rotating shallow-water models."""

from . import jetfield, liealg, models, numerics, reductions, symkernel
from .jetfield import VariableSpace, VectorField, lie_bracket, prolong, symmetry_residual, total_derivative
from .liealg import adjoint_table, commutator_table, optimal_system, reduce_to_representative
from .models import build_system, catalog, generic_1ppt
from .numerics import integrate, lambert_w, run_figure
from .reductions import CANDIDATES, reduce, verify_candidate

__version__ = "0.1.0"

__all__ = [
    "CANDIDATES", "VariableSpace", "VectorField", "adjoint_table", "build_system", "catalog",
    "commutator_table", "generic_1ppt", "integrate", "jetfield", "lambert_w", "lie_bracket",
    "liealg", "models", "numerics", "optimal_system", "prolong", "reduce", "reduce_to_representative",
    "reductions", "run_figure", "symkernel", "symmetry_residual", "total_derivative", "verify_candidate",
]
