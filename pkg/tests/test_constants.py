import math

import pytest
from hypothesis import given, strategies as st

from choquard_bubbles import (ParameterError, ProblemParams, alpha_coeff, b0_geometric,
                              energy_constants, gamma_fn, hls_constant, i_alpha_m,
                              radial_integral, riesz_factor)
from choquard_bubbles.constants import (alpha_from_sobolev, log_gamma, sobolev_constant,
                                        sphere_area, zeta)
from choquard_bubbles.errors import DivergenceError, DomainError
from choquard_bubbles.quadrature import integrate_radial


def radial_oracle(f, N):
    return integrate_radial(f, N, tol=0.0, rel_tol=1e-13).value


@pytest.mark.parametrize("x, expected", [(0.5, math.sqrt(math.pi)), (5.0, 24.0),
                                         (2.5, 1.5 * 0.5 * math.sqrt(math.pi)),
                                         (1.0, 1.0), (10.0, 362880.0)])
def test_gamma_known_values(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-13)


@given(st.floats(0.05, 60.0))
def test_gamma_matches_stdlib(x):
    assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-13, abs=1e-13)


def test_gamma_rejects_nonpositive():
    with pytest.raises((DomainError, ParameterError, ValueError)):
        gamma_fn(0.0)


def test_zeta_values():
    assert zeta(2) == pytest.approx(math.pi ** 2 / 6, rel=1e-14)
    assert zeta(4) == pytest.approx(math.pi ** 4 / 90, rel=1e-14)
    # Apery's constant
    assert zeta(3) == pytest.approx(1.2020569031595942, rel=1e-14)


def test_radial_integral_examples():
    assert radial_integral(5, 5) == pytest.approx(math.pi ** 3 / 32, rel=1e-13)
    assert radial_integral(5, 3.5) == pytest.approx(math.pi ** 2.5 / gamma_fn(3.5), rel=1e-13)
    assert radial_integral(6, 4) == pytest.approx(math.pi ** 3 / 6, rel=1e-13)


def test_radial_integral_frozen_oracles():
    # frozen from the 1D quadrature oracle below
    assert radial_oracle(lambda s: (1 + s * s) ** -5, 5) == pytest.approx(0.9689461462593684,
                                                                         rel=1e-12)
    assert radial_oracle(lambda s: (1 + s * s) ** -4, 6) == pytest.approx(5.16771278004997,
                                                                         rel=1e-12)


@given(st.integers(5, 8), st.floats(0.2, 6.0))
def test_radial_integral_matches_quadrature(N, extra):
    p = N / 2 + extra
    assert radial_integral(N, p) == pytest.approx(
        radial_oracle(lambda s: (1 + s * s) ** (-p), N), rel=1e-9)


def test_radial_integral_diverges():
    with pytest.raises(DivergenceError):
        radial_integral(5, 2.5)


def test_hls_examples():
    g = gamma_fn
    assert hls_constant(ProblemParams(5, 4.0)) == pytest.approx(
        math.pi ** 2 * g(0.5) / g(3) * (g(2.5) / g(5)) ** (-1 / 5), rel=1e-13)
    assert hls_constant(ProblemParams(6, 4.0)) == pytest.approx(
        math.pi ** 2 * g(1) / g(4) * (g(3) / g(6)) ** (-1 / 3), rel=1e-13)


def test_hls_small_mu_limit():
    v = hls_constant(ProblemParams(5, 1e-9)) * math.pi ** (-0.5e-9)
    assert v == pytest.approx(1.0, rel=1e-8)


def test_riesz_factor_examples_and_oracle():
    assert riesz_factor(5, 2) == pytest.approx(math.pi ** 3 / 2, rel=1e-13)
    assert riesz_factor(6, 2) == pytest.approx(math.pi ** 3 / 6, rel=1e-13)
    # at x = 0 the convolution is a radial integral
    oracle = radial_oracle(lambda s: s ** -4 * (1 + s * s) ** -3, 5)
    assert riesz_factor(5, 2) == pytest.approx(oracle, rel=1e-8)
    with pytest.raises(DomainError):
        riesz_factor(5, 2.5)


def test_alpha_exponents_and_positivity():
    P = ProblemParams(6, 4.0)
    S = sobolev_constant(6)
    expected = S ** -0.5 * hls_constant(P) ** -0.5 * 24.0
    assert alpha_from_sobolev(P, S) == pytest.approx(expected, rel=1e-13)
    for N in (5, 6, 7, 8):
        for mu in (0.5, 1.0, 2.0, 4.0):
            assert alpha_coeff(ProblemParams(N, mu)) > 0


@pytest.mark.parametrize("N, mu", [(5, 4.0), (6, 4.0), (5, 1.0), (7, 2.5)])
def test_alpha_residual_calibration_equals_sobolev_form(N, mu):
    P = ProblemParams(N, mu)
    assert alpha_coeff(P) == pytest.approx(alpha_from_sobolev(P, sobolev_constant(N)), rel=1e-12)


def test_energy_constants_relations():
    c = energy_constants(ProblemParams(5, 4.0))
    assert c.a_const / c.c_big == pytest.approx(0.25, rel=1e-14)
    assert c.d_big / c.c_big == pytest.approx(radial_integral(5, 3.5) / radial_integral(5, 5),
                                              rel=1e-13)
    assert c.b2 == pytest.approx(0.5 * c.d_big)
    assert c.b1 == pytest.approx(0.5 * c.alpha ** 2 * radial_integral(5, 3))
    assert c.d_frak == pytest.approx(15.0, rel=1e-12)
    assert c.c1_grad == 0.0 or abs(c.c1_grad) < 1e-14
    assert c.c1_half == pytest.approx(-3 / 7 * c.c2, rel=1e-12)


def test_energy_constants_frozen_n5_mu4():
    c = energy_constants(ProblemParams(5, 4.0))
    assert c.alpha == pytest.approx(0.9836391782538891, rel=1e-12)
    assert c.c_big == pytest.approx(14.0625, rel=1e-10)
    assert c.a_const == pytest.approx(3.515625, rel=1e-10)
    assert c.b1 == pytest.approx(7.5, rel=1e-10)


@given(st.integers(5, 8), st.sampled_from([0.5, 1.0, 2.0, 3.0, 4.0]))
def test_energy_constants_positive(N, mu):
    c = energy_constants(ProblemParams(N, mu))
    assert c.a_const > 0 and c.b1 > 0 and c.b2 > 0


def test_i_alpha_m_examples():
    assert i_alpha_m(1, 2) == pytest.approx(0.5, rel=1e-14)
    assert i_alpha_m(4, 3.5) == pytest.approx(3.5 * i_alpha_m(4, 4.5), rel=1e-12)
    oracle = radial_oracle(lambda s: s ** 0 * (1 + s * s) ** -3.5, 5) / sphere_area(4)
    assert i_alpha_m(4, 3.5) == pytest.approx(oracle, rel=1e-10)


@given(st.floats(0.0, 8.0), st.floats(0.3, 6.0))
def test_i_alpha_m_recursion(alpha, gap):
    m = (alpha + 1) / 2 + gap
    lhs = i_alpha_m(alpha, m)
    rhs = 2 * m / (2 * m - alpha - 1) * i_alpha_m(alpha, m + 1)
    assert lhs == pytest.approx(rhs, rel=1e-11)


def test_i_alpha_m_diverges():
    with pytest.raises(DivergenceError):
        i_alpha_m(3, 2)


@pytest.mark.parametrize("N", [5, 6, 7])
def test_sign_identity(N):
    omega = sphere_area(N - 1)
    lhs = omega * (i_alpha_m(N - 1, (N + 4) / 2) - i_alpha_m(N + 1, (N + 4) / 2))
    assert lhs == pytest.approx(-(N - 2) / (N + 2) * radial_integral(N, (N + 2) / 2), rel=1e-10)


def test_b0_values():
    assert b0_geometric(6) == pytest.approx(1 / 720, rel=1e-13)
    assert b0_geometric(5) == pytest.approx(2 * 1.2020569031595942 / (2 * math.pi) ** 3,
                                            rel=1e-13)
    assert b0_geometric(5) == pytest.approx(0.0096920, rel=1e-4)
    assert b0_geometric(6) < b0_geometric(5)
    with pytest.raises(ParameterError):
        b0_geometric(4)


def test_problem_params_validation():
    for N, mu in ((4, 2.0), (9, 2.0), (5, 0.0), (5, 4.5), (5.5, 2.0)):
        with pytest.raises(ParameterError):
            ProblemParams(N, mu)
    assert ProblemParams(5, 4.0).two_star_mu == 2.0
    assert ProblemParams(5, 4.0).exact_quadratic
