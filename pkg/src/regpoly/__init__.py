"""Derivative-matching polynomial interpolation in a Newton product basis."""

from .collocate import Bvp1D, CollocationProblem, node_residuals, solve_bvp_1d, solve_collocation
from .expr import JetValue, eval_jet, evaluate, parse
from .hermite import (
    HermiteProblem,
    InterpolationError,
    basis_coefficients,
    interpolate_hermite,
    interpolate_operator_preserving,
)
from .multivariate import MultiHermiteProblem, interpolate_hermite_nd, interpolate_newton_nd
from .numeric import precision
from .operators import DifferentialOperator
from .poly import NewtonPolynomial, ProductTerm, poly_eval_jet, to_monomial
from .synthesis import Member, blend_many, blend_pair
from .verify import convergence_study, dense_oracle, error_report
from .wkb import WkbModel, assemble_kernel, expand

__all__ = [
    "Bvp1D",
    "CollocationProblem",
    "DifferentialOperator",
    "HermiteProblem",
    "InterpolationError",
    "JetValue",
    "Member",
    "MultiHermiteProblem",
    "NewtonPolynomial",
    "ProductTerm",
    "WkbModel",
    "assemble_kernel",
    "basis_coefficients",
    "blend_many",
    "blend_pair",
    "convergence_study",
    "dense_oracle",
    "error_report",
    "eval_jet",
    "evaluate",
    "expand",
    "interpolate_hermite",
    "interpolate_hermite_nd",
    "interpolate_newton_nd",
    "interpolate_operator_preserving",
    "node_residuals",
    "parse",
    "poly_eval_jet",
    "precision",
    "solve_bvp_1d",
    "solve_collocation",
    "to_monomial",
]
