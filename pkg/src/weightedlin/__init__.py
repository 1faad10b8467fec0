"""Exact weighted linearization of formal vector fields."""

__version__ = "0.1.0"

from .errors import (
    ContextMismatch,
    LinearizationError,
    NonEvaluative,
    NotADiffeo,
    NotAdmissible,
    OrderBoundViolation,
    SingularAdjoint,
)
from .series import SeriesContext, TruncatedSeries, Weighting, compose, reciprocal, theta_w, weighted_degree
from .vectorfield import (
    FormalDiffeo,
    Isotopy,
    TimeVectorField,
    VectorField,
    compose_diffeo,
    evaluate_isotopy,
    evaluate_time_vf,
    exponential_flow,
    flow,
    invert_diffeo,
    lie_bracket,
    pullback_vf,
)
from .weighting import euler_field, graded_component_vf, is_admissible, kappa_family, slice_basis
from .normal_form import (
    LinearizationResult,
    adjoint_matrix,
    euler_like_linearize,
    is_adjoint_invertible,
    iterative_linearize_oracle,
    linearize,
    moser_linearize,
    solve_homological,
    verify_linearization,
)
from .spectral import (
    Unsupported,
    char_poly,
    compatible_ordering,
    enumerate_resonances,
    is_hyperbolic,
    linear_part,
    weighted_linear_part,
)

__all__ = [
    "ContextMismatch", "LinearizationError", "NonEvaluative", "NotADiffeo", "NotAdmissible",
    "OrderBoundViolation", "SingularAdjoint",
    "SeriesContext", "TruncatedSeries", "Weighting", "compose", "reciprocal", "theta_w", "weighted_degree",
    "FormalDiffeo", "Isotopy", "TimeVectorField", "VectorField", "compose_diffeo", "evaluate_isotopy",
    "evaluate_time_vf", "exponential_flow", "flow", "invert_diffeo", "lie_bracket", "pullback_vf",
    "euler_field", "graded_component_vf", "is_admissible", "kappa_family", "slice_basis",
    "LinearizationResult", "adjoint_matrix", "euler_like_linearize", "is_adjoint_invertible",
    "iterative_linearize_oracle", "linearize", "moser_linearize", "solve_homological", "verify_linearization",
    "Unsupported", "char_poly", "compatible_ordering", "enumerate_resonances", "is_hyperbolic",
    "linear_part", "weighted_linear_part",
]
