"""Damped Newton inner solver wrapped in the r-continuation outer loop.

The outer schedule is fixed: r starts at max(1, sqrt(Res(x0))), each
successful inner solve appends a trace point, and r contracts by
max(r_floor, min(0.1 r, r^2, sqrt(Res))) until Res <= outer_tol.  The
inner solver is plain damped Newton on the squared residual merit with
dense LU steps; iterates are never projected onto the nonnegative
orthant, feasibility is only measured.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .kernels import SmoothingKernel
from .ncp import EvaluationError, NcpProblem, feas_metric, res_metric
from .smoothing import EvalCounter, g_r, g_r_partials

__all__ = [
    "SolveStatus",
    "InnerStatus",
    "SolverConfig",
    "TracePoint",
    "SolveReport",
    "InnerResult",
    "r_init",
    "r_update",
    "newton_inner",
    "continuation_solve",
]


class SolveStatus(str, Enum):
    CONVERGED = "converged"
    MAX_OUTER_EXCEEDED = "max_outer_exceeded"
    INNER_FAILURE = "inner_failure"
    EVALUATION_ERROR = "evaluation_error"


class InnerStatus(str, Enum):
    SUCCESS = "success"
    MAX_ITERATIONS = "max_iterations"
    LINE_SEARCH_FAILED = "line_search_failed"
    SINGULAR_JACOBIAN = "singular_jacobian"


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and budgets for one continuation run."""

    outer_tol: float = 1e-8
    inner_tol: float = 1e-10
    max_outer: int = 50
    max_inner: int = 200
    armijo_sigma: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 50
    r_floor: float = 1e-16

    def __post_init__(self):
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if not 0.0 < self.armijo_sigma < 0.5:
            raise ValueError("armijo_sigma must lie in (0, 1/2)")
        for name in ("outer_tol", "inner_tol", "r_floor"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("max_outer", "max_inner", "max_backtracks"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if not self.outer_tol > self.r_floor ** 2:
            raise ValueError("outer_tol must exceed r_floor squared")


@dataclass(frozen=True)
class TracePoint:
    """State after one outer iteration: the inner solution at one r."""

    outer_index: int
    r: float
    x: np.ndarray = field(repr=False)
    res: float
    feas: float
    inner_iters: int


@dataclass(frozen=True)
class SolveReport:
    """Outcome of a continuation run.

    out_iter counts r-values consumed (one per trace point); in_iter is
    the total number of Jacobian evaluations across all inner solves.
    wall_time is informational only and excluded from any determinism or
    acceptance contract.
    """

    status: SolveStatus
    x_final: np.ndarray = field(repr=False)
    out_iter: int
    in_iter: int
    res: float
    feas: float
    wall_time: float
    trace: list = field(repr=False)


@dataclass(frozen=True)
class InnerResult:
    x: np.ndarray = field(repr=False)
    fx: np.ndarray | None = field(repr=False)
    iterations: int
    jac_evals: int
    status: InnerStatus
    merit_history: list = field(repr=False)
    residual_inf: float


def r_init(x0, fx0) -> float:
    """Initial smoothing level max(1, sqrt(Res(x0)))."""
    return max(1.0, math.sqrt(res_metric(x0, fx0)))


def r_update(r: float, x, fx, r_floor: float = 1e-16) -> float:
    """Next smoothing level max(r_floor, min(0.1 r, r^2, sqrt(Res(x))))."""
    if not r > 0.0:
        raise ValueError("r must be positive")
    res = res_metric(x, fx)
    return max(r_floor, min(0.1 * r, r * r, math.sqrt(res)))


def _solve_step(jac_h, h):
    try:
        d = np.linalg.solve(jac_h, -h)
    except np.linalg.LinAlgError:
        return None
    if not np.isfinite(d).all():
        return None
    return d


def newton_inner(
    problem: NcpProblem,
    kernel: SmoothingKernel,
    r: float,
    x0,
    cfg: SolverConfig | None = None,
    counter: EvalCounter | None = None,
    fx0=None,
) -> InnerResult:
    """Damped Newton iteration on the smoothed residual at fixed r.

    Merit m(x) = 0.5 ||H_r(x)||^2 with Armijo acceptance
    m(x + a d) <= (1 - 2 sigma a) m(x).  Trial points where F or the
    composition is undefined count as merit +inf and shorten the step;
    evaluation errors at the starting point propagate.  Passing fx0
    (the value of F at x0) skips the initial F evaluation.
    """
    if cfg is None:
        cfg = SolverConfig()
    if not r > 0.0:
        raise ValueError("newton_inner requires r > 0")
    x = np.asarray(x0, dtype=float).copy()
    fx = problem.F(x, counter) if fx0 is None else np.asarray(fx0, dtype=float)
    h = g_r(kernel, x, fx, r)
    merit = 0.5 * float(h @ h)
    merits = [merit]
    hinf = float(np.max(np.abs(h)))
    iters = 0
    jac_evals = 0
    idx = np.arange(problem.n)

    def result(status):
        return InnerResult(
            x=x,
            fx=fx,
            iterations=iters,
            jac_evals=jac_evals,
            status=status,
            merit_history=merits,
            residual_inf=hinf,
        )

    while hinf > cfg.inner_tol:
        if iters >= cfg.max_inner:
            return result(InnerStatus.MAX_ITERATIONS)
        jf = problem.jacobian(x, counter)
        jac_evals += 1
        try:
            d1, d2 = g_r_partials(kernel, x, fx, r)
        except ArithmeticError:
            return result(InnerStatus.SINGULAR_JACOBIAN)
        jac_h = d2[:, None] * jf
        jac_h[idx, idx] += d1
        d = _solve_step(jac_h, h)
        if d is None:
            # one diagonal nudge scaled to the row-sum norm, then give up
            bump = 1e-10 * (1.0 + float(np.abs(jac_h).sum(axis=1).max()))
            jac_b = jac_h.copy()
            jac_b[idx, idx] += bump
            d = _solve_step(jac_b, h)
            if d is None:
                return result(InnerStatus.SINGULAR_JACOBIAN)
        alpha = 1.0
        accepted = False
        for _ in range(cfg.max_backtracks + 1):
            trial = x + alpha * d
            try:
                fx_t = problem.F(trial, counter)
                h_t = g_r(kernel, trial, fx_t, r)
                merit_t = 0.5 * float(h_t @ h_t)
            except (EvaluationError, ArithmeticError):
                merit_t = math.inf
            # strict inequality keeps every accepted step a real decrease
            # even when the Armijo bound rounds to merit itself
            if merit_t < merit and merit_t <= (1.0 - 2.0 * cfg.armijo_sigma * alpha) * merit:
                accepted = True
                break
            alpha *= cfg.backtrack_factor
        if not accepted:
            return result(InnerStatus.LINE_SEARCH_FAILED)
        x, fx, h, merit = trial, fx_t, h_t, merit_t
        hinf = float(np.max(np.abs(h)))
        merits.append(merit)
        iters += 1
    return result(InnerStatus.SUCCESS)


def continuation_solve(
    problem: NcpProblem,
    kernel: SmoothingKernel,
    x0,
    cfg: SolverConfig | None = None,
) -> SolveReport:
    """Solve the complementarity problem by driving r to zero.

    Inner solves that merely exhaust their budgets hand their best iterate
    to the next, smaller r: at large r the smoothed system may have no
    root at all, so a merit stall there is expected, not fatal.  A hard
    inner breakdown (singular linearization) retries once at the geometric
    mean of the failed and the previous r, warm started from the same
    point; a second breakdown ends the run with inner_failure.  Domain
    errors at accepted points end the run with evaluation_error.
    """
    if cfg is None:
        cfg = SolverConfig()
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (problem.n,):
        raise ValueError(f"expected start of shape ({problem.n},), got {x.shape}")
    counter = EvalCounter()
    trace: list[TracePoint] = []
    t0 = time.perf_counter()

    def report(status, res, feas):
        return SolveReport(
            status=status,
            x_final=x.copy(),
            out_iter=len(trace),
            in_iter=counter.jac_evals,
            res=res,
            feas=feas,
            wall_time=time.perf_counter() - t0,
            trace=trace,
        )

    try:
        fx = problem.F(x, counter)
    except EvaluationError:
        trace.append(TracePoint(0, math.inf, x.copy(), math.inf, math.inf, 0))
        return report(SolveStatus.EVALUATION_ERROR, math.inf, math.inf)
    r = r_init(x, fx)
    prev_r = None
    res = res_metric(x, fx)
    feas = feas_metric(x, fx)
    for k in range(cfg.max_outer):
        try:
            inner = newton_inner(problem, kernel, r, x, cfg, counter, fx0=fx)
            if inner.status is InnerStatus.SINGULAR_JACOBIAN and prev_r is not None:
                r_retry = math.sqrt(r * prev_r)
                retry = newton_inner(problem, kernel, r_retry, x, cfg, counter, fx0=fx)
                if retry.status is not InnerStatus.SINGULAR_JACOBIAN:
                    inner, r = retry, r_retry
        except EvaluationError:
            trace.append(TracePoint(k, r, x.copy(), math.inf, math.inf, 0))
            return report(SolveStatus.EVALUATION_ERROR, math.inf, math.inf)
        except ArithmeticError:
            trace.append(TracePoint(k, r, x.copy(), res, feas, 0))
            return report(SolveStatus.INNER_FAILURE, res, feas)
        x = inner.x
        if inner.fx is not None:
            fx = inner.fx
            res = res_metric(x, fx)
            feas = feas_metric(x, fx)
        else:
            res, feas = math.inf, math.inf
        trace.append(TracePoint(k, r, x.copy(), res, feas, inner.iterations))
        if inner.status is InnerStatus.SINGULAR_JACOBIAN:
            return report(SolveStatus.INNER_FAILURE, res, feas)
        if res <= cfg.outer_tol:
            return report(SolveStatus.CONVERGED, res, feas)
        prev_r = r
        r_new = r_update(r, x, fx, cfg.r_floor)
        if r_new >= r:
            # pinned at the floor, the schedule cannot contract further
            break
        r = r_new
    return report(SolveStatus.MAX_OUTER_EXCEEDED, res, feas)
