import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from choquard_bubbles.constants import ProblemParams, radial_integral, sphere_area
from choquard_bubbles.errors import BudgetExceededError, DivergenceError
from choquard_bubbles.geometry import BubbleConfig
from choquard_bubbles.quadrature import (BubbleProposal, QuadratureResult, adaptive_cubature,
                                         integrate_centers, integrate_radial,
                                         integrate_three_center, integrate_two_center,
                                         monte_carlo_stratified, reduction_plan, sector_strata,
                                         whole_space)


def test_result_arithmetic():
    a = QuadratureResult(1.0, 0.1, 10)
    b = QuadratureResult(2.0, 0.2, 5)
    c = a + b
    assert c.value == 3.0 and c.evaluations == 15
    assert c.abs_error_estimate == pytest.approx(0.3)
    assert a.scaled(-2.0).value == -2.0 and a.scaled(-2.0).abs_error_estimate == pytest.approx(0.2)


def test_adaptive_cubature_polynomial_and_peak():
    res = adaptive_cubature(lambda t, x: x[:, 0] ** 6 * x[:, 1] ** 2, [[0, 0]], [[1, 1]],
                            abs_tol=1e-14, rel_tol=0.0)
    assert res.value == pytest.approx(1 / 21, rel=1e-13)
    res = adaptive_cubature(lambda t, x: 1.0 / (1e-4 + x[:, 0] ** 2), [[-1]], [[1]],
                            abs_tol=1e-10, rel_tol=0.0)
    assert res.value == pytest.approx(2 * 100 * math.atan(100), rel=1e-10)


def test_budget_exceeded_carries_partial():
    with pytest.raises(BudgetExceededError) as exc:
        adaptive_cubature(lambda t, x: (1e-12 + np.abs(x[:, 0] - 0.1234)) ** -0.5, [[-1]], [[1]],
                          abs_tol=1e-15, rel_tol=0.0, budget=2000)
    exact = 2 * (math.sqrt(1.1234) + math.sqrt(0.8766))
    assert exc.value.partial.value == pytest.approx(exact, rel=1e-2)


@pytest.mark.parametrize("N", [5, 6, 8])
def test_radial_bubble_powers(N):
    res = integrate_radial(lambda s: (1 + s * s) ** (-N), N, tol=0.0, rel_tol=1e-13)
    assert res.value == pytest.approx(radial_integral(N, N), rel=1e-12)


def test_radial_singular_origin():
    # int |y|^-4 (1+|y|^2)^-3 over R^5 = omega_4 * B(1/2, 5/2) / 2
    res = integrate_radial(lambda s: s ** -4.0 * (1 + s * s) ** -3.0, 5, tol=0.0, rel_tol=1e-13)
    assert res.value == pytest.approx(sphere_area(4) * 3 * math.pi / 16, rel=1e-12)


def test_radial_slow_tail():
    # omega_4 int (1+rho)^{-1.5} d rho over R^5 with weight rho^{-4}
    res = integrate_radial(lambda s: s ** -4.0 * (1 + s) ** -1.5, 5, tol=0.0, rel_tol=1e-10)
    assert res.value == pytest.approx(sphere_area(4) * 2.0, rel=1e-9)


def test_radial_divergence_detected():
    with pytest.raises(DivergenceError):
        integrate_radial(lambda s: (1 + s * s) ** -2.5, 5)


def test_two_center_matches_three_center():
    N = 5
    a, b, c = np.zeros(N), np.eye(N)[0] * 2.0, np.eye(N)[1] * 1.5

    def g2(s, t):
        return (1 + s * s) ** -3 * (1 + t * t) ** -2

    two = integrate_two_center(g2, a, b, N, tol=0.0, rel_tol=1e-10).value
    three = integrate_three_center(lambda s, t, u: g2(s, t), a, b, c, N, tol=0.0,
                                   rel_tol=1e-6).value
    assert three == pytest.approx(two, rel=1e-5)


def test_two_center_product_radial_limit():
    # with one factor constant the two-center integral is a radial one
    N = 6
    v = integrate_two_center(lambda s, t: (1 + s * s) ** -4 + 0 * t, np.zeros(N), np.eye(N)[0],
                             N, tol=0.0, rel_tol=1e-11).value
    assert v == pytest.approx(radial_integral(N, 4), rel=1e-10)


def test_two_center_rejects_coincident():
    with pytest.raises(ValueError):
        integrate_two_center(lambda s, t: s, np.zeros(5), np.zeros(5), 5)


def test_indicator_with_breaks():
    # volume of the unit ball about a, far from b, under the compact partition
    N = 5
    vol = math.pi ** 2.5 / math.gamma(3.5)
    for d in (3.5, 6.0):
        res = integrate_two_center(lambda s, t: (s < 1.0) * 1.0, np.zeros(N), np.eye(N)[0] * d,
                                   N, tol=1e-12, rel_tol=0.0, breaks=[[1.0], None])
        assert res.value == pytest.approx(vol, rel=1e-10)


def test_reduction_plan_dedups_and_ranks():
    N = 5
    plan = reduction_plan([np.zeros(N), np.zeros(N), np.eye(N)[0]], N)
    assert plan.effective_dim == 2
    plan3 = reduction_plan([np.zeros(N), np.eye(N)[0], np.eye(N)[1]], N)
    assert plan3.effective_dim == 3


@given(st.floats(0.2, 8.0), st.floats(0.0, 2 * math.pi))
def test_two_center_rotation_invariant(d, theta):
    N = 5
    b1 = np.zeros(N)
    b1[0] = d
    b2 = np.zeros(N)
    b2[0], b2[1] = d * math.cos(theta), d * math.sin(theta)

    def g(s, t):
        return (1 + s * s) ** -3 * (1 + t * t) ** -3

    v1 = integrate_two_center(g, np.zeros(N), b1, N, tol=0.0, rel_tol=1e-9).value
    v2 = integrate_two_center(g, np.zeros(N), b2, N, tol=0.0, rel_tol=1e-9).value
    assert v1 == pytest.approx(v2, rel=1e-8)


def test_mc_bubble_square_is_unbiased_and_deterministic():
    N = 5
    prop = BubbleProposal(tuple(np.zeros(N)), 1.0, N - 1.0)

    def f(x):
        return (1 + np.sum(x * x, axis=1)) ** (-(N - 2.0))

    r1 = monte_carlo_stratified(f, [whole_space(prop)], 40000, seed=3)
    r2 = monte_carlo_stratified(f, [whole_space(prop)], 40000, seed=3)
    assert r1.value == r2.value
    assert abs(r1.value - radial_integral(N, N - 2)) < 4 * r1.abs_error_estimate


def test_sector_strata_cover_space():
    P = ProblemParams(5, 4.0)
    cfg = BubbleConfig(P, 4, 1.0, 3.0)
    strata = sector_strata(cfg, R=3.0, p=4.0, far_p=3.0)
    x = np.random.default_rng(0).standard_normal((2000, 5)) * 2
    counts = sum(np.asarray(s.contains(x), dtype=int) for s in strata)
    assert np.all(counts == 1)


def test_three_center_tolerance_refinement_consistent():
    N = 5
    c = [np.zeros(N), np.eye(N)[0] * 4.0, np.eye(N)[1] * 4.0]

    def g(a, b, d):
        return (1 + a * a) ** -3 * (1 + b * b) ** -1.5 * (1 + d * d) ** -1.5

    v1 = integrate_centers(g, c, N, tol=0.0, rel_tol=1e-4).value
    v2 = integrate_centers(g, c, N, tol=0.0, rel_tol=1e-6).value
    assert v1 == pytest.approx(v2, rel=1e-3)
