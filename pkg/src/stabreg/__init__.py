"""Stabilized-regularized least squares for discrete ill-conditioned problems."""

from __future__ import annotations

__version__ = "0.1.0"

from .analysis import SweepResult, bound_report, error_metrics, gamma_grid, lcurve_points, run_sweep
from .errors import (
    DegenerateReference,
    InvalidDimension,
    InvalidParameter,
    NonConvergence,
    SingularToWorkingPrecision,
    StabRegError,
)
from .linalg import (
    SvdResult,
    condition_number,
    min_norm_solution,
    numerical_rank,
    singular_values,
    solve_linear,
    svd,
)
from .operators import regularization_operator
from .perturbation import NoiseSpec, perturb
from .problems import ProblemInstance, generate, gravity, heat, phillips, shaw
from .solvers import (
    FilterProfile,
    RegConfig,
    bias_vector,
    covariance_norm,
    filtered_solution,
    limit_filter_factors,
    stabreg_filter_factors,
    stabreg_solve,
    tikhonov_filter_factors,
    tikhonov_solve,
)

__all__ = [
    "__version__",
    "SweepResult",
    "bound_report",
    "error_metrics",
    "gamma_grid",
    "lcurve_points",
    "run_sweep",
    "DegenerateReference",
    "InvalidDimension",
    "InvalidParameter",
    "NonConvergence",
    "SingularToWorkingPrecision",
    "StabRegError",
    "SvdResult",
    "condition_number",
    "min_norm_solution",
    "numerical_rank",
    "singular_values",
    "solve_linear",
    "svd",
    "regularization_operator",
    "NoiseSpec",
    "perturb",
    "ProblemInstance",
    "generate",
    "gravity",
    "heat",
    "phillips",
    "shaw",
    "FilterProfile",
    "RegConfig",
    "bias_vector",
    "covariance_norm",
    "filtered_solution",
    "limit_filter_factors",
    "stabreg_filter_factors",
    "stabreg_solve",
    "tikhonov_filter_factors",
    "tikhonov_solve",
]
