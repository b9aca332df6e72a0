"""Smoothing kernels for the soft-min reformulation of complementarity.

A kernel is an increasing function theta with theta(0) = 0, theta(t) -> 1 as
t -> +inf and theta(t) < 0 for t < 0, packaged together with psi = 1 - theta,
the derivatives of psi and the inverse of psi.  Everything downstream (the
soft-min operator, the smoothed residual map, the curvature analysis and the
continuation solver) is parameterised by one of these objects.

Two named kernels are provided: the rational kernel theta(t) = t/(t+1) on
t >= 0 (extended linearly below zero) and the exponential kernel
theta(t) = 1 - exp(-t).  A one-parameter family phi_lambda interpolates
between them through the ODE (psi')^2 = (1/lambda) * psi * psi''.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

__all__ = [
    "SmoothnessClass",
    "AnalyticBranch",
    "SmoothingKernel",
    "PhiLambdaParams",
    "HaReport",
    "make_rational",
    "make_exponential",
    "make_phi_lambda",
    "theta_r",
    "check_Ha",
    "kernel_from_selector",
]


class SmoothnessClass(Enum):
    C2_EVERYWHERE = "C2_everywhere"
    PIECEWISE_C2 = "piecewise_C2"


def _piecewise(t, in_main, main_fn, other_fn):
    """Evaluate main_fn where in_main(t) holds and other_fn elsewhere.

    Accepts scalars or arrays and preserves the input kind.
    """
    arr = np.asarray(t, dtype=float)
    flat = np.atleast_1d(arr)
    out = np.empty_like(flat)
    m = in_main(flat)
    if m.any():
        out[m] = main_fn(flat[m])
    rest = ~m
    if rest.any():
        out[rest] = other_fn(flat[rest])
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def _require_positive(y, name):
    arr = np.asarray(y, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError(f"{name} is defined on positive arguments only")
    return arr


@dataclass(frozen=True)
class AnalyticBranch:
    """Globally convex C^2 representative of psi, used by curvature analysis.

    For kernels whose solver form is only piecewise C^2 (the rational kernel
    has a linear piece with psi'' = 0) this carries the smooth closed form on
    its natural domain x > x_low, with psi_inv defined on all of (0, inf).
    """

    psi: Callable = field(repr=False)
    dpsi: Callable = field(repr=False)
    d2psi: Callable = field(repr=False)
    psi_inv: Callable = field(repr=False)
    x_low: float = -math.inf


@dataclass(frozen=True)
class SmoothingKernel:
    """Increasing theta with theta(0) = 0, theta(+inf) = 1, and psi = 1 - theta.

    theta_dominates_reference records whether theta(t) >= t/(t+1) holds on a
    log grid of positive arguments; the residual bound x_i * F_i <= r^2 at
    roots of the smoothed system is only guaranteed for such kernels.

    softmin_override / softmin_partials_override are numerically stable
    closed forms for the induced soft-min and its partial derivatives; when
    absent the generic psi_inv(psi + psi) composition is used.
    """

    name: str
    theta: Callable = field(repr=False)
    psi: Callable = field(repr=False)
    dpsi: Callable = field(repr=False)
    d2psi: Callable = field(repr=False)
    psi_inv: Callable = field(repr=False)
    smoothness_class: SmoothnessClass = SmoothnessClass.C2_EVERYWHERE
    analytic: AnalyticBranch | None = field(default=None, repr=False)
    theta_dominates_reference: bool = False
    softmin_override: Callable | None = field(default=None, repr=False)
    softmin_partials_override: Callable | None = field(default=None, repr=False)


@dataclass(frozen=True)
class PhiLambdaParams:
    """Parameters of the phi_lambda kernel family.

    lam = 1 gives the exponential kernel with rate d; lam > 1 gives
    psi(x) = (c1*x + 1)^(-1/(lam-1)) on its power branch.  lam = 2, c1 = 1
    reproduces the rational kernel on t >= 0.
    """

    lam: float
    c1: float = 1.0
    d: float = 1.0

    def __post_init__(self):
        if not self.lam >= 1.0:
            raise ValueError("phi_lambda requires lam >= 1")
        if not self.c1 > 0.0:
            raise ValueError("phi_lambda requires c1 > 0")
        if not self.d > 0.0:
            raise ValueError("phi_lambda requires d > 0")


_REFERENCE_GRID = np.logspace(-8.0, 8.0, 16 * 64 + 1)


def _dominates_reference(theta):
    """Exact check theta(t) >= t/(t+1) on a log grid of positive t."""
    vals = theta(_REFERENCE_GRID)
    ref = _REFERENCE_GRID / (_REFERENCE_GRID + 1.0)
    return bool(np.all(vals >= ref))


def make_rational() -> SmoothingKernel:
    """Kernel with theta(t) = t/(t+1) for t >= 0 and theta(t) = t below.

    psi is C^1 everywhere but psi'' jumps at 0 (2 from the right, 0 from the
    left); derivative values at 0 use the right branch.
    """

    def _nonneg(u):
        return u >= 0.0

    def theta(t):
        return _piecewise(t, _nonneg, lambda u: u / (u + 1.0), lambda u: u)

    def psi(t):
        return _piecewise(t, _nonneg, lambda u: 1.0 / (u + 1.0), lambda u: 1.0 - u)

    def dpsi(t):
        return _piecewise(
            t, _nonneg, lambda u: -1.0 / (u + 1.0) ** 2, lambda u: -np.ones_like(u)
        )

    def d2psi(t):
        return _piecewise(
            t, _nonneg, lambda u: 2.0 / (u + 1.0) ** 3, lambda u: np.zeros_like(u)
        )

    def psi_inv(y):
        arr = _require_positive(y, "psi_inv")
        return _piecewise(
            arr, lambda v: v <= 1.0, lambda v: 1.0 / v - 1.0, lambda v: 1.0 - v
        )

    def a_psi(x):
        return 1.0 / (1.0 + np.asarray(x, dtype=float))

    def a_dpsi(x):
        return -1.0 / (1.0 + np.asarray(x, dtype=float)) ** 2

    def a_d2psi(x):
        return 2.0 / (1.0 + np.asarray(x, dtype=float)) ** 3

    def a_psi_inv(y):
        return 1.0 / _require_positive(y, "psi_inv") - 1.0

    analytic = AnalyticBranch(a_psi, a_dpsi, a_d2psi, a_psi_inv, x_low=-1.0)
    return SmoothingKernel(
        name="rational",
        theta=theta,
        psi=psi,
        dpsi=dpsi,
        d2psi=d2psi,
        psi_inv=psi_inv,
        smoothness_class=SmoothnessClass.PIECEWISE_C2,
        analytic=analytic,
        theta_dominates_reference=_dominates_reference(theta),
    )


def _make_exponential_family(rate: float, name: str) -> SmoothingKernel:
    d = float(rate)

    def theta(t):
        return -np.expm1(-d * np.asarray(t, dtype=float))

    def psi(t):
        return np.exp(-d * np.asarray(t, dtype=float))

    def dpsi(t):
        return -d * np.exp(-d * np.asarray(t, dtype=float))

    def d2psi(t):
        return d * d * np.exp(-d * np.asarray(t, dtype=float))

    def psi_inv(y):
        return -np.log(_require_positive(y, "psi_inv")) / d

    def softmin(s, t, r):
        s_ = np.asarray(s, dtype=float)
        t_ = np.asarray(t, dtype=float)
        lo = np.minimum(s_, t_)
        gap = np.abs(s_ - t_)
        return lo - (r / d) * np.log1p(np.exp(-d * gap / r))

    def softmin_partials(s, t, r):
        # softmax weights; computed so the pair sums to 1.0 exactly
        s_ = np.asarray(s, dtype=float)
        t_ = np.asarray(t, dtype=float)
        z = d * (t_ - s_) / r
        flat = np.atleast_1d(z)
        ws = np.empty_like(flat)
        pos = flat >= 0.0
        ws[pos] = 1.0 / (1.0 + np.exp(-flat[pos]))
        ws[~pos] = 1.0 - 1.0 / (1.0 + np.exp(flat[~pos]))
        wt = 1.0 - ws
        if np.asarray(z).ndim == 0:
            return float(ws[0]), float(wt[0])
        shape = np.asarray(z).shape
        return ws.reshape(shape), wt.reshape(shape)

    analytic = AnalyticBranch(psi, dpsi, d2psi, psi_inv, x_low=-math.inf)
    return SmoothingKernel(
        name=name,
        theta=theta,
        psi=psi,
        dpsi=dpsi,
        d2psi=d2psi,
        psi_inv=psi_inv,
        smoothness_class=SmoothnessClass.C2_EVERYWHERE,
        analytic=analytic,
        theta_dominates_reference=_dominates_reference(theta),
        softmin_override=softmin,
        softmin_partials_override=softmin_partials,
    )


def make_exponential() -> SmoothingKernel:
    """Kernel with theta(t) = 1 - exp(-t); C^2 everywhere.

    Satisfies the halving condition psi(s) <= psi(a*s)/2 for every a in (0,1)
    once s >= ln(2)/(1-a), so the induced soft-min converges to the exact min.
    """
    return _make_exponential_family(1.0, "exp")


def make_phi_lambda(params: PhiLambdaParams) -> SmoothingKernel:
    """Kernel from the family (psi')^2 = (1/lam) * psi * psi''.

    lam = 1 returns the exponential kernel with rate d (identical to
    make_exponential() when d = 1).  For lam > 1 the power form
    psi(x) = (c1*x + 1)^(-1/(lam-1)) holds on x >= x0 = -1/(2*c1) and is
    continued affinely below x0 with matching value and slope, keeping theta
    increasing and C^1 on all of R.
    """
    if params.lam == 1.0:
        if params.d == 1.0:
            return make_exponential()
        return _make_exponential_family(params.d, f"phi:1:{params.d:g}")

    lam = float(params.lam)
    c = float(params.c1)
    p = 1.0 / (lam - 1.0)
    x0 = -1.0 / (2.0 * c)
    psi0 = 2.0**p
    slope = -p * c * 2.0 ** (p + 1.0)  # psi'(x0)

    def _power_side(u):
        return u >= x0

    def _psi_pow(u):
        return np.exp(-p * np.log1p(c * u))

    def _theta_pow(u):
        if p == 1.0:
            return c * u / (c * u + 1.0)
        return -np.expm1(-p * np.log1p(c * u))

    def theta(t):
        return _piecewise(
            t, _power_side, _theta_pow, lambda u: 1.0 - (psi0 + slope * (u - x0))
        )

    def psi(t):
        return _piecewise(t, _power_side, _psi_pow, lambda u: psi0 + slope * (u - x0))

    def dpsi(t):
        return _piecewise(
            t,
            _power_side,
            lambda u: -p * c * np.exp(-(p + 1.0) * np.log1p(c * u)),
            lambda u: np.full_like(u, slope),
        )

    def d2psi(t):
        return _piecewise(
            t,
            _power_side,
            lambda u: p * (p + 1.0) * c * c * np.exp(-(p + 2.0) * np.log1p(c * u)),
            lambda u: np.zeros_like(u),
        )

    def _psi_inv_pow(y):
        return np.expm1(-np.log(y) / p) / c

    def psi_inv(y):
        arr = _require_positive(y, "psi_inv")
        return _piecewise(
            arr,
            lambda v: v <= psi0,
            _psi_inv_pow,
            lambda v: x0 + (v - psi0) / slope,
        )

    def a_psi_inv(y):
        return _psi_inv_pow(_require_positive(y, "psi_inv"))

    def a_dpsi(x):
        u = np.asarray(x, dtype=float)
        return -p * c * np.exp(-(p + 1.0) * np.log1p(c * u))

    def a_d2psi(x):
        u = np.asarray(x, dtype=float)
        return p * (p + 1.0) * c * c * np.exp(-(p + 2.0) * np.log1p(c * u))

    def a_psi(x):
        return _psi_pow(np.asarray(x, dtype=float))

    analytic = AnalyticBranch(a_psi, a_dpsi, a_d2psi, a_psi_inv, x_low=-1.0 / c)
    name = f"phi:{lam:g}" if c == 1.0 else f"phi:{lam:g}:{c:g}"
    return SmoothingKernel(
        name=name,
        theta=theta,
        psi=psi,
        dpsi=dpsi,
        d2psi=d2psi,
        psi_inv=psi_inv,
        smoothness_class=SmoothnessClass.PIECEWISE_C2,
        analytic=analytic,
        theta_dominates_reference=_dominates_reference(theta),
    )


def theta_r(kernel: SmoothingKernel, t, r: float):
    """Scaled kernel theta_r(t) = theta(t/r); r must be positive."""
    if not r > 0.0:
        raise ValueError("theta_r requires r > 0")
    return kernel.theta(np.asarray(t, dtype=float) / r)


@dataclass(frozen=True)
class HaReport:
    """Result of scanning the halving condition psi(s) <= psi(a*s)/2.

    holds_from is the smallest grid point from which the condition holds at
    every remaining grid point; violated_at is the largest failing grid point
    when failures persist into the last decade scanned.  Exactly one of the
    two is set.
    """

    kernel: str
    a: float
    s_max: float
    grid_points: int
    holds_from: float | None = None
    violated_at: float | None = None

    @property
    def satisfied(self) -> bool:
        return self.holds_from is not None


def check_Ha(
    kernel: SmoothingKernel,
    a: float,
    s_max: float,
    decades: int = 6,
    points_per_decade: int = 64,
) -> HaReport:
    """Scan psi(s) <= psi(a*s)/2 on a geometric grid ending at s_max.

    The scan covers `decades` decades below s_max with points_per_decade
    points each.  Failures inside the last decade are reported as a
    violation; otherwise the empirical threshold is returned.
    """
    if not 0.0 < a < 1.0:
        raise ValueError("check_Ha requires 0 < a < 1")
    if not s_max > 0.0:
        raise ValueError("check_Ha requires s_max > 0")
    n = decades * points_per_decade + 1
    grid = np.geomspace(s_max * 10.0 ** (-decades), s_max, n)
    ok = kernel.psi(grid) <= 0.5 * kernel.psi(a * grid)
    if bool(ok.all()):
        return HaReport(kernel.name, a, s_max, n, holds_from=float(grid[0]))
    last_fail = int(np.flatnonzero(~ok)[-1])
    if grid[last_fail] > s_max / 10.0:
        return HaReport(kernel.name, a, s_max, n, violated_at=float(grid[last_fail]))
    return HaReport(kernel.name, a, s_max, n, holds_from=float(grid[last_fail + 1]))


def kernel_from_selector(selector: str) -> SmoothingKernel:
    """Build a kernel from a CLI selector.

    Accepted forms: "rational", "exp", "phi:<lambda>[:<c1-or-d>]" where the
    trailing value is c1 for lambda > 1 and the rate d for lambda = 1.
    """
    sel = selector.strip()
    if sel == "rational":
        return make_rational()
    if sel == "exp":
        return make_exponential()
    if sel.startswith("phi:"):
        parts = sel.split(":")
        if len(parts) not in (2, 3):
            raise ValueError(f"malformed kernel selector {selector!r}")
        try:
            lam = float(parts[1])
            extra = float(parts[2]) if len(parts) == 3 else 1.0
        except ValueError as exc:
            raise ValueError(f"malformed kernel selector {selector!r}") from exc
        return make_phi_lambda(PhiLambdaParams(lam=lam, c1=extra, d=extra))
    raise ValueError(f"unknown kernel selector {selector!r}")
