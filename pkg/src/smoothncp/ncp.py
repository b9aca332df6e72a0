"""Problem abstraction, residual metrics, and sampled P-function tests.

A complementarity problem asks for x >= 0 with F(x) >= 0 and x_i F_i(x) = 0
per component.  Progress is measured by two metrics: Res(x), the worst
componentwise product |x_i F_i(x)|, and Feas(x), the l1 mass of the negative
parts of x and F(x).  Both vanish together exactly at solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analysis import AnalysisReport
from .smoothing import EvalCounter, fd_jacobian, h_r

__all__ = [
    "EvaluationError",
    "NcpProblem",
    "ErrorModulus",
    "quadratic_modulus",
    "res_metric",
    "feas_metric",
    "p0_sample_test",
    "p_sample_test_hr",
    "error_bound",
]

P0_SLACK = 1e-12
SOLUTION_TOL = 1e-8


class EvaluationError(Exception):
    """Raised when F (or its Jacobian) is asked for a point outside its domain."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


def res_metric(x, fx) -> float:
    """Res(x) = max_i |x_i * F_i(x)|."""
    x_ = np.asarray(x, dtype=float)
    f_ = np.asarray(fx, dtype=float)
    if x_.shape != f_.shape:
        raise ValueError("x and F(x) must have matching shapes")
    return float(np.max(np.abs(x_ * f_)))


def feas_metric(x, fx) -> float:
    """Feas(x) = ||min(x, 0)||_1 + ||min(F(x), 0)||_1."""
    x_ = np.asarray(x, dtype=float)
    f_ = np.asarray(fx, dtype=float)
    if x_.shape != f_.shape:
        raise ValueError("x and F(x) must have matching shapes")
    return float(-np.minimum(x_, 0.0).sum() - np.minimum(f_, 0.0).sum())


@dataclass
class NcpProblem:
    """A complementarity problem instance.

    eval_F maps an n-vector to an n-vector; eval_JF, when present, returns
    the n-by-n Jacobian (a forward-difference fallback is used otherwise).
    known_solutions are reference points validated at construction time
    against Res <= 1e-8 and Feas <= 1e-8.  sample_box gives per-coordinate
    intervals for diagnostic sampling, [0, 20] by default.  meta carries
    family-specific constants (matrices, eigenvalues, oracle solutions).
    """

    name: str
    n: int
    eval_F: Callable = field(repr=False)
    eval_JF: Callable | None = field(default=None, repr=False)
    known_solutions: list = field(default_factory=list)
    sample_box: np.ndarray | None = None
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("problem dimension must be at least 1")
        if self.sample_box is None:
            self.sample_box = np.tile([0.0, 20.0], (self.n, 1))
        else:
            self.sample_box = np.asarray(self.sample_box, dtype=float)
            if self.sample_box.shape != (self.n, 2):
                raise ValueError("sample_box must have shape (n, 2)")
        self.known_solutions = [
            np.asarray(s, dtype=float) for s in self.known_solutions
        ]
        for k, sol in enumerate(self.known_solutions):
            fx = self.F(sol)
            res = res_metric(sol, fx)
            feas = feas_metric(sol, fx)
            if res > SOLUTION_TOL or feas > SOLUTION_TOL:
                raise ValueError(
                    f"known solution {k} of {self.name!r} fails validation "
                    f"(Res={res:.2e}, Feas={feas:.2e})"
                )

    def F(self, x, counter: EvalCounter | None = None) -> np.ndarray:
        """Evaluate F, tallying on `counter` when given."""
        x_ = np.asarray(x, dtype=float)
        if x_.shape != (self.n,):
            raise ValueError(f"expected point of shape ({self.n},), got {x_.shape}")
        fx = np.asarray(self.eval_F(x_), dtype=float)
        if fx.shape != (self.n,):
            raise ValueError(f"F returned shape {fx.shape}, expected ({self.n},)")
        if counter is not None:
            counter.f_evals += 1
        return fx

    def jacobian(self, x, counter: EvalCounter | None = None) -> np.ndarray:
        """Jacobian of F; analytic when available, forward differences otherwise.

        Either path counts as a single Jacobian evaluation.
        """
        x_ = np.asarray(x, dtype=float)
        if counter is not None:
            counter.jac_evals += 1
        if self.eval_JF is not None:
            jf = np.asarray(self.eval_JF(x_), dtype=float)
        else:
            jf = fd_jacobian(self.eval_F, x_)
        if jf.shape != (self.n, self.n):
            raise ValueError(f"Jacobian has shape {jf.shape}, expected square")
        return jf


def _sample_pairs(problem: NcpProblem, pair_count: int, seed: int):
    rng = np.random.default_rng(seed)
    lo = problem.sample_box[:, 0]
    hi = problem.sample_box[:, 1]
    shape = (pair_count, 2, problem.n)
    return lo + (hi - lo) * rng.uniform(size=shape)


def _p_sample_report(problem, map_fn, pair_count, seed, strict, prop, extra):
    draws = _sample_pairs(problem, pair_count, seed)
    max_defect = -math.inf
    witness = None
    threshold = 0.0 if strict else -P0_SLACK
    for k in range(pair_count):
        x, y = draws[k, 0], draws[k, 1]
        diff = x - y
        active = diff != 0.0
        if not active.any():
            continue
        gap = np.asarray(map_fn(x), dtype=float) - np.asarray(map_fn(y), dtype=float)
        m = float(np.max(diff[active] * gap[active]))
        defect = (threshold - m) if strict else (-m - P0_SLACK)
        violated = (m <= threshold) if strict else (m < -P0_SLACK)
        if defect > max_defect:
            max_defect = defect
        if violated and witness is None:
            witness = {"pair": k, "x": x.tolist(), "y": y.tolist(), "value": m}
    desc = f"{pair_count} pairs from sample box, seed {seed}{extra}"
    if witness is None:
        return AnalysisReport(
            property=prop, grid=desc, outcome="holds", max_defect=max_defect
        )
    return AnalysisReport(
        property=prop, grid=desc, outcome="violated",
        max_defect=max_defect, witness=witness,
    )


def p0_sample_test(problem: NcpProblem, pair_count: int = 200, seed: int = 0):
    """Sampled P0 check: max over differing components of (x-y)_i (F(x)-F(y))_i
    must not fall below -1e-12 on any drawn pair."""
    return _p_sample_report(
        problem, lambda z: problem.F(z), pair_count, seed,
        strict=False, prop="p0_sampled", extra="",
    )


def p_sample_test_hr(
    problem: NcpProblem,
    kernel,
    r: float,
    pair_count: int = 200,
    seed: int = 0,
):
    """Sampled strict-P check for the smoothed map x -> H_r(x).

    For P0 problems the smoothed map is a P-function for every r > 0, so the
    componentwise criterion must be strictly positive on every sampled pair.
    """
    return _p_sample_report(
        problem,
        lambda z: h_r(problem, kernel, z, r),
        pair_count,
        seed,
        strict=True,
        prop="p_sampled_hr",
        extra=f", r={r:g}",
    )


@dataclass(frozen=True)
class ErrorModulus:
    """Monotonicity modulus h with inverse, valid on [0, epsilon) / [0, eta).

    Models the assumption h(||x - y||) <= <x - y, F(x) - F(y)> near the
    solution, which converts the residual bound n * r^2 into the error bound
    ||x* - x(r)|| <= h_inv(n * r^2).
    """

    h: Callable = field(repr=False)
    h_inv: Callable = field(repr=False)
    epsilon: float = math.inf
    eta: float = math.inf


def quadratic_modulus(mu: float) -> ErrorModulus:
    """Modulus family h(u) = mu * u^2, the strong-monotonicity case."""
    if not mu > 0.0:
        raise ValueError("quadratic modulus requires mu > 0")
    return ErrorModulus(
        h=lambda u: mu * np.asarray(u, dtype=float) ** 2,
        h_inv=lambda v: np.sqrt(np.asarray(v, dtype=float) / mu),
    )


def error_bound(modulus: ErrorModulus, n: int, r: float) -> float:
    """Distance bound h_inv(n * r^2); requires n * r^2 inside the modulus range."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if r < 0.0:
        raise ValueError("r must be nonnegative")
    v = n * r * r
    if v >= modulus.eta:
        raise ValueError(
            f"residual level n*r^2 = {v:g} outside the modulus range [0, {modulus.eta:g})"
        )
    return float(modulus.h_inv(v))
