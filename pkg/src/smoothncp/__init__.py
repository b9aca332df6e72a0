"""Soft-min smoothing and continuation Newton solver for complementarity problems.

The library replaces the nonsmooth condition min(x_i, F_i(x)) = 0 with a
one parameter family of smooth equations H_r(x) = 0 built from a kernel
function, and drives r to zero with a fixed continuation schedule.  See
the kernels, smoothing, analysis, ncp, problems, solver, and cli modules.
"""

from .analysis import (
    AnalysisReport,
    LimitEstimate,
    check_concavity,
    check_speed_bound,
    check_subadditivity,
    g_hessian_entries,
    g_r_deriv_r,
    l_function,
    limit_probe,
    log_grid,
    v_function,
)
from .cli import (
    BenchRun,
    format_table,
    generate_starts,
    main,
    run_analyze,
    run_bench,
    run_trace,
)
from .kernels import (
    AnalyticBranch,
    HaReport,
    PhiLambdaParams,
    SmoothingKernel,
    SmoothnessClass,
    check_Ha,
    kernel_from_selector,
    make_exponential,
    make_phi_lambda,
    make_rational,
    theta_r,
)
from .ncp import (
    ErrorModulus,
    EvaluationError,
    NcpProblem,
    error_bound,
    feas_metric,
    p0_sample_test,
    p_sample_test_hr,
    quadratic_modulus,
    res_metric,
)
from .problems import (
    ProblemSpec,
    active_set_solve,
    analytic2d,
    hp_hard,
    kojima_shindo,
    linear_spd,
    nash_cournot,
    problem_from_selector,
    scalable_monotone,
)
from .smoothing import (
    EvalCounter,
    SmoothedResidual,
    f_min,
    fd_jacobian,
    fixed_point_map,
    g_r,
    g_r_partials,
    h_r,
    h_r_jacobian,
    smoothed_residual,
)
from .solver import (
    InnerResult,
    InnerStatus,
    SolveReport,
    SolveStatus,
    SolverConfig,
    TracePoint,
    continuation_solve,
    newton_inner,
    r_init,
    r_update,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "AnalyticBranch",
    "BenchRun",
    "EvalCounter",
    "ErrorModulus",
    "EvaluationError",
    "HaReport",
    "InnerResult",
    "InnerStatus",
    "LimitEstimate",
    "NcpProblem",
    "PhiLambdaParams",
    "ProblemSpec",
    "SmoothedResidual",
    "SmoothingKernel",
    "SmoothnessClass",
    "SolveReport",
    "SolveStatus",
    "SolverConfig",
    "TracePoint",
    "active_set_solve",
    "analytic2d",
    "check_Ha",
    "check_concavity",
    "check_speed_bound",
    "check_subadditivity",
    "continuation_solve",
    "error_bound",
    "f_min",
    "fd_jacobian",
    "feas_metric",
    "fixed_point_map",
    "format_table",
    "g_hessian_entries",
    "g_r",
    "g_r_deriv_r",
    "g_r_partials",
    "generate_starts",
    "h_r",
    "h_r_jacobian",
    "hp_hard",
    "kernel_from_selector",
    "kojima_shindo",
    "l_function",
    "limit_probe",
    "linear_spd",
    "log_grid",
    "main",
    "make_exponential",
    "make_phi_lambda",
    "make_rational",
    "nash_cournot",
    "newton_inner",
    "p0_sample_test",
    "p_sample_test_hr",
    "problem_from_selector",
    "quadratic_modulus",
    "r_init",
    "r_update",
    "res_metric",
    "run_analyze",
    "run_bench",
    "run_trace",
    "scalable_monotone",
    "smoothed_residual",
    "theta_r",
    "v_function",
]
