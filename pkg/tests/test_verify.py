import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from choquard_bubbles import SCHEMA_HEADER
from choquard_bubbles.constants import ProblemParams, alpha_coeff
from choquard_bubbles.errors import ParameterError
from choquard_bubbles.geometry import BubbleConfig, ansatz_eval
from choquard_bubbles.potentials import constant, gaussian_bump
from choquard_bubbles.verify import (SlopeFit, WeightedNormSpec, _elementary_ratio,
                                     check_convolution_bound, check_elementary_inequalities,
                                     check_two_center_inequality, convolution_lhs,
                                     error_decay_slope, fit_loglog, format_csv,
                                     weighted_norm_estimate)

P5 = ProblemParams(5, 4.0)
STAR = WeightedNormSpec("star", 5)
STAR2 = WeightedNormSpec("star_star", 5)


def test_weight_spec_exponents():
    assert STAR.exponent == 2.0 and STAR.lambda_power == -1.5
    assert STAR2.exponent == 4.0 and STAR2.lambda_power == -3.5
    with pytest.raises(ParameterError):
        WeightedNormSpec("other", 5)
    with pytest.raises(ParameterError):
        WeightedNormSpec("star", 5, tau=0.0)


def _single_bubble_star_norm_oracle():
    # U / weight = alpha (1 + s)^2 / (1 + s^2)^{3/2} in s = lam |x|, peak at s^2 + 3 s = 2
    s = (math.sqrt(17) - 3) / 2
    return alpha_coeff(P5) * (1 + s) ** 2 / (1 + s * s) ** 1.5


def test_single_bubble_star_norm():
    oracle = _single_bubble_star_norm_oracle()
    assert oracle / alpha_coeff(P5) == pytest.approx(1.6164, abs=1e-4)
    for lam in (1.0, 10.0):
        cfg = BubbleConfig(P5, 1, 1.0, lam)
        est = weighted_norm_estimate(lambda x: ansatz_eval(cfg, x), STAR, cfg)
        assert est.converged
        assert est.value == pytest.approx(oracle, rel=1e-8)
        assert est.value <= oracle * (1 + 1e-12)


def test_two_bubble_star_norm_against_dense_grid():
    cfg = BubbleConfig(P5, 2, 1.0, 3.0)
    est = weighted_norm_estimate(lambda x: ansatz_eval(cfg, x), STAR, cfg)
    # dense oracle on the plane of the centers (the sup sits there by symmetry)
    g = np.linspace(-2.5, 2.5, 801)
    X, Y = np.meshgrid(g, g)
    pts = np.zeros((X.size, 5))
    pts[:, 0], pts[:, 1] = X.ravel(), Y.ravel()
    dense = np.max(ansatz_eval(cfg, pts) / STAR.weight(cfg, pts))
    assert est.value >= dense * (1 - 1e-9)
    assert est.value == pytest.approx(dense, rel=1e-4)


def test_norm_of_zero_and_of_weight():
    cfg = BubbleConfig(P5, 3, 1.0, 5.0)
    assert weighted_norm_estimate(lambda x: np.zeros(len(x)), STAR2, cfg).value == 0.0
    est = weighted_norm_estimate(lambda x: STAR2.weight(cfg, x), STAR2, cfg)
    assert est.value == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ParameterError):
        weighted_norm_estimate(lambda x: x[:, 0], WeightedNormSpec("star", 6), cfg)


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6))
def test_extra_points_never_lower_estimate(seed):
    cfg = BubbleConfig(P5, 3, 1.0, 4.0)

    def f(x):
        return np.sin(3 * x[:, 0]) * ansatz_eval(cfg, x)

    base = weighted_norm_estimate(f, STAR, cfg, refine=2)
    extra = np.random.default_rng(seed).standard_normal((50, 5))
    more = weighted_norm_estimate(f, STAR, cfg, extra_points=extra, refine=2)
    assert more.value >= base.value


def test_symmetric_search_agrees_with_full():
    cfg = BubbleConfig(P5, 4, 1.0, 6.0)
    f = lambda x: ansatz_eval(cfg, x)  # noqa: E731
    full = weighted_norm_estimate(f, STAR, cfg).value
    sym = weighted_norm_estimate(f, STAR, cfg, symmetric=True).value
    assert sym == pytest.approx(full, rel=1e-6)


def test_budget_exhaustion_flags_unconverged():
    cfg = BubbleConfig(P5, 3, 1.0, 4.0)
    est = weighted_norm_estimate(lambda x: ansatz_eval(cfg, x), STAR, cfg, sampling_budget=10)
    assert not est.converged


def test_norm_seed_determinism():
    cfg = BubbleConfig(P5, 3, 1.0, 4.0)
    f = lambda x: ansatz_eval(cfg, x) * np.cos(x[:, 2])  # noqa: E731
    a = weighted_norm_estimate(f, STAR, cfg, seed=5)
    b = weighted_norm_estimate(f, STAR, cfg, seed=5)
    assert a.value == b.value and np.array_equal(a.argmax, b.argmax)


# ---------------------------------------------------------------------------

@given(st.floats(-5, 5), st.floats(-3, 3))
def test_loglog_recovers_power_law(p, c):
    x = np.geomspace(1, 100, 6)
    fit = fit_loglog(x, math.exp(c) * x ** p)
    assert fit.slope == pytest.approx(p, abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-9) or abs(p) < 1e-6
    assert fit.monotone and fit.flag == "ok"


def test_slope_fit_edge_cases():
    with pytest.raises(ParameterError):
        fit_loglog([1, 2, 3], [1, 2, 3])
    fit = fit_loglog([1, 2, 3, 4], [0, 0, 0, 0])
    assert fit.degenerate and fit.flag == "degenerate_zero"
    with pytest.raises(ParameterError):
        fit_loglog([1, 2, 3, 4], [1, 0, 2, 1])
    assert fit_loglog([1, 2, 3, 4], [1, 3, 2, 4]).flag == "non_monotone"
    with pytest.raises(ParameterError):
        SlopeFit([(0, 0)] * 4, 1.0, 0.0, 1.5)


def test_error_slope_k1_exact_zero():
    fit = error_decay_slope(1, constant(0.0), sampling_budget=5000)
    assert fit.degenerate


def test_error_slope_two_bubbles_decays():
    fit, norms = error_decay_slope(2, gaussian_bump(0.0, 1.0, 1.0, 0.2), sampling_budget=20000,
                                   return_norms=True)
    assert len(norms) == 5 and fit.slope < -0.9


# ---------------------------------------------------------------------------

def test_two_center_witness_at_least_center_value():
    xi_i, xi_j = np.zeros(5), np.array([2.0, 0, 0, 0, 0])
    chk = check_two_center_inequality(3, 3, 3, xi_i, xi_j, sample_count=2000)
    d = 2.0
    at_center = (1 + d) ** -3 / (d ** -3 * (1 + (1 + d) ** -3))
    assert chk.C_witness >= at_center
    assert chk.passed and chk.C_witness < 4.0
    c, ok = chk
    assert c == chk.C_witness and ok


def test_two_center_translation_invariant():
    shift = np.array([3.0, -1.0, 0.5, 0, 0])
    xi_i, xi_j = np.zeros(5), np.array([1.5, 0.5, 0, 0, 0])
    a = check_two_center_inequality(2, 3, 1.5, xi_i, xi_j, sample_count=2000)
    b = check_two_center_inequality(2, 3, 1.5, xi_i + shift, xi_j + shift, sample_count=2000)
    assert a.C_witness == pytest.approx(b.C_witness, rel=1e-6)


def test_two_center_validation():
    with pytest.raises(ParameterError):
        check_two_center_inequality(0.5, 3, 0.2, np.zeros(5), np.ones(5))
    with pytest.raises(ParameterError):
        check_two_center_inequality(3, 3, 4, np.zeros(5), np.ones(5))
    with pytest.raises(ParameterError):
        check_two_center_inequality(3, 3, 1, np.zeros(5), np.zeros(5))


def test_convolution_lhs_at_origin_closed_form():
    # alpha = N - mu, eta = 1/2: omega_4 int_0^inf (1 + s)^{-3/2} ds = 2 omega_4 = 16 pi^2 / 3
    assert convolution_lhs(1.0, 0.5, 4.0, 5, 0.0) == pytest.approx(16 * math.pi ** 2 / 3,
                                                                   rel=1e-8)


def test_convolution_bound_stable_with_expected_slope():
    chk = check_convolution_bound(2.5, 0.05, 4.0, 5)
    assert chk.passed
    assert chk.info["slope"] == pytest.approx(chk.info["expected_slope"], abs=0.1)


def test_convolution_bound_validation():
    with pytest.raises(ParameterError):
        check_convolution_bound(1.0, 0.0, 4.0, 5)
    with pytest.raises(ParameterError):
        check_convolution_bound(0.5, 0.1, 4.0, 5)


def test_elementary_exact_values():
    assert float(_elementary_ratio(2.0, 1, 0.7)) == pytest.approx(1.0)
    assert float(_elementary_ratio(2.0, 0, 1e-3)) == pytest.approx(2.001 / 1.001, rel=1e-12)
    assert float(_elementary_ratio(3.0, 1, 0.0)) == 0.0
    assert float(_elementary_ratio(3.0, 1, -2.0)) == pytest.approx(0.5)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0, 4.0])
def test_elementary_inequalities_stable(q):
    res = check_elementary_inequalities(q, sample_count=5000)
    assert ("first" in res) == (q <= 2)
    assert all(chk.passed for chk in res.values())
    assert check_elementary_inequalities(q, sample_count=5000)["second"].C_witness == \
        res["second"].C_witness


def test_elementary_second_fails_below_one():
    # the remainder bound by |b|^q alone is unbounded as a -> 0 when q < 1
    t = np.geomspace(1e2, 1e8, 7)
    r = _elementary_ratio(0.5, 1, t)
    assert np.all(np.diff(r) > 0) and r[-1] > 1e3


# ---------------------------------------------------------------------------

def test_format_csv_layout():
    text = format_csv(("a", "b", "c"), [(0.1, True, None), (3, "x", 1e-300)])
    lines = text.split("\n")
    assert lines[0] == SCHEMA_HEADER
    assert lines[1] == "a,b,c"
    assert lines[2] == "0.1,true,"
    assert float(lines[3].split(",")[2]) == 1e-300
    assert "\r" not in text and text.endswith("\n")
