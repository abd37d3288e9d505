"""Structure-preserving interpolatory model reduction for linear quantum stochastic systems."""

from .analysis import (
    ErrorReport,
    GridSpec,
    default_grid,
    error_exact,
    error_report,
    error_surface,
    frequency_response,
    h2_error_gramian,
    h2_error_quadrature,
    hinf_bound_left,
    hinf_bound_right,
    hinf_bounds_passive,
    hinf_error,
)
from .errors import (
    DataValidationError,
    InfeasiblePointError,
    QmorError,
    RankDeficiencyError,
    SchemaError,
    SingularMatrixError,
    StabilityError,
    StructureError,
)
from .reduction import (
    InterpolationData,
    ReductionResult,
    passive_stability_certificate,
    reduce_left,
    reduce_passive,
    reduce_right,
)
from .selection import (
    SelectionProblem,
    SelectionResult,
    conjugate_pair_points,
    cost_h2,
    cost_hinf,
    optimize_points,
    symmetric_dc_points,
    tangent_directions,
)
from .symplectic import SkewNormalForm, is_symplectic, skew_normal_form
from .systems import (
    AnnihilationSystem,
    QuadratureSystem,
    RealizabilityReport,
    annihilation_to_quadrature,
    check_realizability,
    closed_loop_state_matrix,
    random_realizable_annihilation,
    random_realizable_quadrature,
    symplectic_form,
    transfer,
)

__version__ = "0.1.0"

__all__ = [
    "AnnihilationSystem",
    "DataValidationError",
    "ErrorReport",
    "GridSpec",
    "InfeasiblePointError",
    "InterpolationData",
    "QmorError",
    "QuadratureSystem",
    "RankDeficiencyError",
    "RealizabilityReport",
    "ReductionResult",
    "SchemaError",
    "SelectionProblem",
    "SelectionResult",
    "SingularMatrixError",
    "SkewNormalForm",
    "StabilityError",
    "StructureError",
    "annihilation_to_quadrature",
    "check_realizability",
    "closed_loop_state_matrix",
    "conjugate_pair_points",
    "cost_h2",
    "cost_hinf",
    "default_grid",
    "error_exact",
    "error_report",
    "error_surface",
    "frequency_response",
    "h2_error_gramian",
    "h2_error_quadrature",
    "hinf_bound_left",
    "hinf_bound_right",
    "hinf_bounds_passive",
    "hinf_error",
    "is_symplectic",
    "optimize_points",
    "passive_stability_certificate",
    "random_realizable_annihilation",
    "random_realizable_quadrature",
    "reduce_left",
    "reduce_passive",
    "reduce_right",
    "skew_normal_form",
    "symmetric_dc_points",
    "symplectic_form",
    "tangent_directions",
    "transfer",
]
