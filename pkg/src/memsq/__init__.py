"""Numerical laboratory for a nonlocal parabolic touchdown model with Robin
boundary conditions: steady-state branches and their fold, analytic bounds,
a moving-mesh implicit solver, and touchdown (quenching) diagnostics.
"""

__version__ = "0.1.0"

from ._kernels import BACKEND as kernel_backend
from .core import (
    Geometry,
    GeometryFacts,
    MeshState,
    FieldState,
    ParameterError,
    ProblemParams,
    geometry_facts,
    initial_state,
    unit_ball_volume,
    validate,
)
from .quadrature import (
    NonlocalGain,
    QuenchedStateError,
    composite_integral,
    nonlocal_gain,
    reaction,
)
from .steady import (
    Branch,
    BranchError,
    BranchPoint,
    BoundsReport,
    Eigenpair,
    CANONICAL_M_GRID,
    bounds_report,
    dirichlet_limit_lambda,
    local_branch_point,
    nonlocal_branch_point,
    principal_eigenpair,
    pohozaev_lower_bound,
    pohozaev_residual,
    mu_star_lower_bound,
    upper_bound_lambda_star,
    quench_threshold_lambda,
    radial_fold,
    radial_profile,
    reconstruct_profile,
    trace_branch,
)
from .evolve import (
    DaeVector,
    SchemeConfig,
    Snapshot,
    StepFailure,
    MeshTangled,
    StepResult,
    Trajectory,
    assemble,
    integrate,
    monitor,
    step,
    stencils,
    time_dilation,
)
from .quench import (
    EnergyRecord,
    QuenchReport,
    detect_and_extrapolate,
    energy,
    fit_rate,
    profile_fit,
    quench_report,
    single_point_check,
)

__all__ = [
    "__version__",
    "kernel_backend",
    "Geometry",
    "GeometryFacts",
    "MeshState",
    "FieldState",
    "ParameterError",
    "ProblemParams",
    "geometry_facts",
    "initial_state",
    "unit_ball_volume",
    "validate",
    "NonlocalGain",
    "QuenchedStateError",
    "composite_integral",
    "nonlocal_gain",
    "reaction",
    "Branch",
    "BranchError",
    "BranchPoint",
    "BoundsReport",
    "Eigenpair",
    "CANONICAL_M_GRID",
    "bounds_report",
    "dirichlet_limit_lambda",
    "local_branch_point",
    "nonlocal_branch_point",
    "principal_eigenpair",
    "pohozaev_lower_bound",
    "pohozaev_residual",
    "mu_star_lower_bound",
    "upper_bound_lambda_star",
    "quench_threshold_lambda",
    "radial_fold",
    "radial_profile",
    "reconstruct_profile",
    "trace_branch",
    "DaeVector",
    "SchemeConfig",
    "Snapshot",
    "StepFailure",
    "MeshTangled",
    "StepResult",
    "Trajectory",
    "assemble",
    "integrate",
    "monitor",
    "step",
    "stencils",
    "time_dilation",
    "EnergyRecord",
    "QuenchReport",
    "detect_and_extrapolate",
    "energy",
    "fit_rate",
    "profile_fit",
    "quench_report",
    "single_point_check",
]
