"""Soft-min operator, smoothed residual map, and the exact nonsmooth reference.

The soft minimum induced by a kernel is

    g_r(s, t) = r * psi_inv( psi(s/r) + psi(t/r) ),

which never exceeds min(s, t) and converges to it (or to zero, depending on
the kernel's tail) as r -> 0.  Applying it componentwise to (x_i, F_i(x))
turns the complementarity conditions into the smooth square system
H_r(x) = 0 solved by the continuation Newton method.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .kernels import SmoothingKernel

if TYPE_CHECKING:  # pragma: no cover
    from .ncp import NcpProblem

__all__ = [
    "EvalCounter",
    "SmoothedResidual",
    "g_r",
    "g_r_partials",
    "h_r",
    "h_r_jacobian",
    "fixed_point_map",
    "f_min",
    "fd_jacobian",
]

_SQRT_EPS = float(np.sqrt(np.finfo(float).eps))


@dataclass
class EvalCounter:
    """Per-run evaluation tally; each solve owns one, so counts stay exact
    under concurrent solves of distinct runs."""

    f_evals: int = 0
    jac_evals: int = 0


def _check_r(r):
    if not r > 0.0:
        raise ValueError("smoothing parameter r must be positive")


def g_r(kernel: SmoothingKernel, s, t, r: float):
    """Soft minimum of s and t at smoothing level r.

    Symmetric, smooth in (s, t), and bounded above by min(s, t) with no
    tolerance.  Scalars and same-shape arrays are both accepted.
    """
    _check_r(r)
    if kernel.softmin_override is not None:
        return kernel.softmin_override(s, t, r)
    s_ = np.asarray(s, dtype=float)
    t_ = np.asarray(t, dtype=float)
    y = kernel.psi(s_ / r) + kernel.psi(t_ / r)
    if not np.all(np.isfinite(y)) or np.any(np.asarray(y) <= 0.0):
        raise FloatingPointError(
            "soft-min evaluation left the representable range of psi"
        )
    return r * kernel.psi_inv(y)


def g_r_partials(kernel: SmoothingKernel, s, t, r: float):
    """Partial derivatives (dG/ds, dG/dt) of the soft minimum.

    Both are psi'(arg/r) / psi'(psi_inv(psi(s/r) + psi(t/r))) and hence
    strictly positive.  For the exponential family they are softmax weights
    summing to one exactly.
    """
    _check_r(r)
    if kernel.softmin_partials_override is not None:
        return kernel.softmin_partials_override(s, t, r)
    s_ = np.asarray(s, dtype=float)
    t_ = np.asarray(t, dtype=float)
    y = kernel.psi(s_ / r) + kernel.psi(t_ / r)
    w = kernel.dpsi(kernel.psi_inv(y))
    if np.any(np.asarray(w) == 0.0):
        raise ArithmeticError("psi' vanished at the soft-min composition point")
    return kernel.dpsi(s_ / r) / w, kernel.dpsi(t_ / r) / w


@dataclass(frozen=True)
class SmoothedResidual:
    """Value of H_r at a point, tagged with the smoothing level used."""

    values: np.ndarray
    r: float
    jacobian_available: bool

    def __post_init__(self):
        _check_r(self.r)


def h_r(problem, kernel: SmoothingKernel, x, r: float, counter=None) -> np.ndarray:
    """Smoothed residual H_r(x)_i = g_r(x_i, F_i(x)).

    Evaluates F exactly once; evaluation failures of F propagate unchanged.
    """
    x_ = np.asarray(x, dtype=float)
    if x_.shape != (problem.n,):
        raise ValueError(f"expected point of shape ({problem.n},), got {x_.shape}")
    fx = problem.F(x_, counter)
    return g_r(kernel, x_, fx, r)


def smoothed_residual(problem, kernel, x, r, counter=None) -> SmoothedResidual:
    values = h_r(problem, kernel, x, r, counter)
    return SmoothedResidual(
        values=np.asarray(values, dtype=float),
        r=float(r),
        jacobian_available=problem.eval_JF is not None,
    )


def h_r_jacobian(
    problem, kernel: SmoothingKernel, x, r: float, counter=None, fx=None
) -> np.ndarray:
    """Jacobian D1 + D2 * JF(x) of the smoothed residual.

    D1 and D2 are the diagonal soft-min partials at (x_i, F_i(x)).  Counts as
    one Jacobian evaluation on `counter`; the finite-difference fallback used
    when the problem ships no analytic Jacobian also counts as one.
    """
    _check_r(r)
    x_ = np.asarray(x, dtype=float)
    if fx is None:
        fx = problem.F(x_, counter)
    d1, d2 = g_r_partials(kernel, x_, fx, r)
    jf = problem.jacobian(x_, counter)
    out = np.asarray(d2)[:, None] * jf
    idx = np.arange(problem.n)
    out[idx, idx] += d1
    return out


def fixed_point_map(problem, kernel: SmoothingKernel, x, r: float, counter=None):
    """Componentwise map x_i -> r * psi_inv(theta(F_i(x)/r)).

    Roots of H_r are exactly its fixed points.  Components with
    theta(F_i/r) <= 0 (i.e. F_i <= 0) are outside the range of psi; they are
    reported by index in the raised ValueError (attribute `indices`).
    """
    _check_r(r)
    x_ = np.asarray(x, dtype=float)
    fx = problem.F(x_, counter)
    vals = np.atleast_1d(np.asarray(kernel.theta(fx / r), dtype=float))
    bad = np.flatnonzero(~(vals > 0.0))
    if bad.size:
        err = ValueError(
            f"fixed-point map undefined at components {bad.tolist()} "
            "(theta(F_i/r) outside the range of psi)"
        )
        err.indices = bad.tolist()
        raise err
    return r * kernel.psi_inv(vals)


def f_min(problem, x, counter=None) -> np.ndarray:
    """Exact nonsmooth residual min(x, F(x)), the limit object of h_r."""
    x_ = np.asarray(x, dtype=float)
    return np.minimum(x_, problem.F(x_, counter))


def fd_jacobian(f: Callable, x: np.ndarray, rel_step: float | None = None) -> np.ndarray:
    """Forward-difference Jacobian with step rel_step * (1 + |x_j|) per column."""
    step = _SQRT_EPS if rel_step is None else rel_step
    x_ = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x_), dtype=float)
    n = x_.size
    out = np.empty((f0.size, n))
    for j in range(n):
        h = step * (1.0 + abs(x_[j]))
        xp = x_.copy()
        xp[j] += h
        out[:, j] = (np.asarray(f(xp), dtype=float) - f0) / h
    return out
