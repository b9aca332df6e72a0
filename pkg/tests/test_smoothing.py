"""Soft-min g_r and the smoothed system H_r: values, bounds, derivatives."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from smoothncp import (
    EvalCounter,
    NcpProblem,
    f_min,
    fd_jacobian,
    fixed_point_map,
    g_r,
    g_r_partials,
    h_r,
    h_r_jacobian,
    problem_from_selector,
    smoothed_residual,
)

args = st.floats(-10.0, 10.0, allow_nan=False)
radii = st.floats(1e-6, 1.0, allow_nan=False)


def one_d_problem(with_jacobian=True):
    """Scalar complementarity problem F(x) = x - 1 with solution x = 1."""
    return NcpProblem(
        name="line1d",
        n=1,
        eval_F=lambda x: x - 1.0,
        eval_JF=(lambda x: np.eye(1)) if with_jacobian else None,
        known_solutions=[np.array([1.0])],
    )


# --- frozen values -----------------------------------------------------------


def test_rational_frozen_values(rational):
    # main branch: psi(s/r) + psi(t/r) <= 1, g = (s t - r^2) / (s + t + 2 r)
    assert g_r(rational, 3.0, 6.0, 1.0) == 1.5454545454545454
    assert g_r(rational, 3.0, 6.0, 1.0) == pytest.approx((3.0 * 6.0 - 1.0) / 11.0, rel=1e-15)
    # other branch (s t < r^2): g = r * (1 - psi(s/r) - psi(t/r)); at the
    # origin both psi values are 1, so g = -r, not the continued -r/2
    assert g_r(rational, 0.0, 0.0, 0.5) == -0.5
    assert g_r(rational, 0.0, 0.0, 0.125) == -0.125


def test_exponential_frozen_value(exponential):
    got = g_r(exponential, 1.0, 2.0, 0.5)
    assert got == 0.9365359944785138
    assert got == pytest.approx(1.0 - 0.5 * math.log1p(math.exp(-2.0)), rel=1e-15)


@given(s=st.floats(0.5, 10.0), t=st.floats(0.5, 10.0), r=st.floats(1e-6, 0.5))
def test_rational_closed_form_on_main_branch(rational, s, t, r):
    # s t >= 1/4 >= r^2 keeps psi(s/r) + psi(t/r) <= 1
    assert g_r(rational, s, t, r) == pytest.approx((s * t - r * r) / (s + t + 2.0 * r), rel=1e-12)


# --- order and distance bounds -----------------------------------------------


@given(s=args, t=args, r=radii)
def test_soft_min_stays_below_min(kernel, s, t, r):
    assert g_r(kernel, s, t, r) <= min(s, t)


@given(s=args, t=args, r=radii)
def test_soft_min_symmetry(kernel, s, t, r):
    assert g_r(kernel, s, t, r) == g_r(kernel, t, s, r)


@given(s=args, t=args, r=radii)
def test_exponential_distance_bound(exponential, s, t, r):
    gap = min(s, t) - g_r(exponential, s, t, r)
    assert 0.0 <= gap <= r * math.log(2.0) + 1e-15


def test_exponential_gap_maximal_on_diagonal(exponential):
    for r in (1.0, 0.1, 1e-3):
        gap = min(2.0, 2.0) - g_r(exponential, 2.0, 2.0, r)
        assert gap == pytest.approx(r * math.log(2.0), rel=1e-15)


@given(s=args, t=args, r=radii, fac=st.floats(1.5, 8.0))
def test_soft_min_decreases_in_r(kernel, s, t, r, fac):
    assert g_r(kernel, s, t, r * fac) <= g_r(kernel, s, t, r) + 1e-12


def test_rejects_nonpositive_r(rational):
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            g_r(rational, 1.0, 1.0, bad)
        with pytest.raises(ValueError):
            h_r(problem_from_selector("analytic2d"), rational, np.ones(2), bad)


# --- partial derivatives ------------------------------------------------------


@given(s=args, t=args, r=radii)
def test_exponential_partials_partition(exponential, s, t, r):
    ds, dt = g_r_partials(exponential, s, t, r)
    assert ds + dt == 1.0
    assert 0.0 <= ds <= 1.0


@pytest.mark.parametrize("s,t,r", [(1.3, -0.7, 0.25), (0.5, 0.49, 0.05), (2.0, 2.0, 1.0)])
def test_partials_match_finite_differences(kernel, s, t, r):
    ds, dt = g_r_partials(kernel, s, t, r)
    hs = 1e-6 * (1.0 + abs(s))
    ht = 1e-6 * (1.0 + abs(t))
    fd_s = (g_r(kernel, s + hs, t, r) - g_r(kernel, s - hs, t, r)) / (2.0 * hs)
    fd_t = (g_r(kernel, s, t + ht, r) - g_r(kernel, s, t - ht, r)) / (2.0 * ht)
    assert ds == pytest.approx(fd_s, rel=1e-5, abs=1e-8)
    assert dt == pytest.approx(fd_t, rel=1e-5, abs=1e-8)


def test_exponential_partials_saturate_cleanly(exponential):
    # |s - t| / r = 1e6: the sigmoid underflows and the weights pin to {0, 1}
    assert g_r_partials(exponential, 1e4, 0.0, 1e-2) == (0.0, 1.0)
    assert g_r(exponential, 1e4, 0.0, 1e-2) == 0.0


# --- the smoothed system ------------------------------------------------------


def test_h_frozen_on_analytic2d(exponential, analytic2d_problem):
    h = h_r(analytic2d_problem, exponential, np.array([0.0, 1.0]), 0.1)
    np.testing.assert_allclose(
        h, [-2.061153620314381e-10, -4.539889921686465e-06], rtol=1e-15)
    # F(0, 1) = (2, 0): both components are exact soft-min overrides
    np.testing.assert_allclose(
        h,
        [-0.1 * math.log1p(math.exp(-20.0)), -0.1 * math.log1p(math.exp(-10.0))],
        rtol=1e-15,
    )


def test_evaluation_counters(exponential, analytic2d_problem):
    x = np.array([0.5, 1.5])
    c = EvalCounter()
    h_r(analytic2d_problem, exponential, x, 0.1, counter=c)
    assert (c.f_evals, c.jac_evals) == (1, 0)
    c = EvalCounter()
    h_r_jacobian(analytic2d_problem, exponential, x, 0.1, counter=c)
    assert (c.f_evals, c.jac_evals) == (1, 1)
    c = EvalCounter()
    fx = analytic2d_problem.eval_F(x)
    h_r_jacobian(analytic2d_problem, exponential, x, 0.1, counter=c, fx=fx)
    assert (c.f_evals, c.jac_evals) == (0, 1)


@pytest.mark.parametrize("selector", ["analytic2d", "ks"])
@pytest.mark.parametrize("r", [1.0, 1e-2])
def test_jacobian_matches_finite_differences(kernel, selector, r):
    problem = problem_from_selector(selector)
    rng = np.random.default_rng(7)
    for _ in range(5):
        x = rng.uniform(0.1, 3.0, size=problem.n)
        jac = h_r_jacobian(problem, kernel, x, r)
        fd = fd_jacobian(lambda y: h_r(problem, kernel, y, r), x, rel_step=1e-7)
        scale = 1.0 + np.abs(jac).max()
        assert np.abs(jac - fd).max() / scale < 1e-6


def test_identity_problem_jacobian_is_identity(exponential):
    # F(x) = x makes both soft-min arguments equal, so the two partials are
    # each 1/2 and their partition sum puts exact ones on the diagonal
    problem = NcpProblem(
        name="identity3",
        n=3,
        eval_F=lambda x: x.copy(),
        eval_JF=lambda x: np.eye(3),
        known_solutions=[np.zeros(3)],
    )
    jac = h_r_jacobian(problem, exponential, np.array([0.3, 1.0, 2.5]), 0.2)
    assert np.array_equal(jac, np.eye(3))


def test_fd_jacobian_on_quadratic():
    fd = fd_jacobian(lambda x: x**2, np.array([1.0, 2.0]))
    np.testing.assert_allclose(fd, np.diag([2.0, 4.0]), rtol=1e-6)


# --- fixed-point form and limit objects ---------------------------------------


def test_fixed_point_at_smoothed_root(rational, exponential):
    problem = one_d_problem()
    # psi-sum roots of g_r(x, x - 1): exponential x = r ln(1 + e^(1/r)),
    # rational x = (1 + sqrt(1 + 4 r^2)) / 2
    x_exp = 0.1 * math.log1p(math.exp(10.0))
    got = fixed_point_map(problem, exponential, np.array([x_exp]), 0.1)
    # theta(F/r) loses a few digits to cancellation at F/r ~ 5e-5
    assert got[0] == pytest.approx(x_exp, rel=1e-10)
    x_rat = (1.0 + math.sqrt(2.0)) / 2.0
    got = fixed_point_map(problem, rational, np.array([x_rat]), 0.5)
    assert got[0] == pytest.approx(x_rat, rel=1e-12)


def test_fixed_point_reports_domain_failure(exponential, analytic2d_problem):
    with pytest.raises(ValueError) as err:
        fixed_point_map(analytic2d_problem, exponential, np.array([0.5, 0.5]), 0.1)
    assert err.value.indices == [1]


def test_f_min_is_componentwise_min(analytic2d_problem):
    assert np.array_equal(f_min(analytic2d_problem, np.array([0.0, 1.0])), np.zeros(2))
    x = np.array([2.0, 2.0])
    expected = np.minimum(x, analytic2d_problem.eval_F(x))
    assert np.array_equal(f_min(analytic2d_problem, x), expected)


def test_smoothed_residual_bundle(exponential, analytic2d_problem):
    x = np.array([0.0, 1.0])
    sr = smoothed_residual(analytic2d_problem, exponential, x, 0.1)
    assert np.array_equal(sr.values, h_r(analytic2d_problem, exponential, x, 0.1))
    assert sr.r == 0.1
    assert sr.jacobian_available is True
    bare = one_d_problem(with_jacobian=False)
    assert smoothed_residual(bare, exponential, np.ones(1), 0.1).jacobian_available is False
