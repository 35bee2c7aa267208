"""Closed-form constants built from Gamma-function blocks.

Everything here is evaluated in log space and exponentiated at the end, so the
formulas stay finite for the whole supported range 5 <= N <= 8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, DivergenceError, ParameterError

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_series(z):
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc = acc + c / (z + i)
    return acc


def log_gamma(x):
    """log Gamma(x) for x > 0 (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("log_gamma requires x > 0")
    small = x < 0.5
    # reflection for small arguments: Gamma(x) Gamma(1-x) = pi / sin(pi x)
    xr = np.where(small, 1.0 - x, x)
    z = xr - 1.0
    t = z + _LANCZOS_G + 0.5
    lg = _HALF_LOG_2PI + (z + 0.5) * np.log(t) - t + np.log(_lanczos_series(z))
    refl = math.log(math.pi) - np.log(np.abs(np.sin(np.pi * x))) - lg
    out = np.where(small, refl, lg)
    return float(out) if out.ndim == 0 else out


def gamma_fn(x):
    """Gamma(x) for positive real x, Lanczos accuracy (~1e-15 relative)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError(f"gamma_fn requires x > 0, got {x}")
    z = np.where(x < 0.5, 1.0 - x, x) - 1.0
    t = z + _LANCZOS_G + 0.5
    direct = math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * np.exp(-t) * _lanczos_series(z)
    out = np.where(x < 0.5, math.pi / (np.sin(np.pi * x) * direct), direct)
    # integers: round to the exact factorial value when representable
    out = np.where((x == np.round(x)) & (x <= 23), np.round(out), out)
    return float(out) if out.ndim == 0 else out


def log_beta(a, b):
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b)


def zeta(s: float, terms: int = 32) -> float:
    """Riemann zeta for real s > 1 by direct summation plus Euler-Maclaurin tail."""
    if not s > 1:
        raise DomainError("zeta requires s > 1")
    m = float(terms)
    head = math.fsum(n ** (-s) for n in range(1, terms))
    # Euler-Maclaurin: tail sum_{n>=M} n^{-s}
    tail = m ** (1 - s) / (s - 1) + 0.5 * m ** (-s)
    # Bernoulli corrections B2/2!, B4/4!, B6/6!
    rising = s
    tail += (1.0 / 12.0) * rising * m ** (-s - 1)
    rising *= (s + 1) * (s + 2)
    tail -= (1.0 / 720.0) * rising * m ** (-s - 3)
    rising *= (s + 3) * (s + 4)
    tail += (1.0 / 30240.0) * rising * m ** (-s - 5)
    return head + tail


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere S^n (embedded in R^{n+1})."""
    return 2.0 * math.pi ** ((n + 1) / 2) / gamma_fn((n + 1) / 2)


@dataclass(frozen=True)
class ProblemParams:
    """Dimension N and Riesz exponent mu; the critical exponent is derived."""

    N: int
    mu: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 5:
            raise ParameterError(f"N must be an integer >= 5, got {self.N}")
        if self.N > 8:
            raise ParameterError(f"N > 8 is not supported, got {self.N}")
        if not (0 < self.mu <= 4):
            raise ParameterError(f"mu must lie in (0, 4], got {self.mu}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def two_star_mu(self) -> float:
        return (2 * self.N - self.mu) / (self.N - 2)

    @property
    def exact_quadratic(self) -> bool:
        """True when 2*_mu = 2, i.e. the Choquard term is exactly quadratic."""
        return self.mu == 4.0


def radial_integral(N: int, p: float) -> float:
    """J_p = int_{R^N} (1+|y|^2)^{-p} dy = pi^{N/2} Gamma(p - N/2) / Gamma(p)."""
    if not 2 * p > N:
        raise DivergenceError(f"int (1+|y|^2)^-{p} diverges in R^{N} (need 2p > N)")
    return math.exp(0.5 * N * math.log(math.pi) + log_gamma(p - N / 2) - log_gamma(p))


def hls_constant(params: ProblemParams) -> float:
    """Sharp Hardy-Littlewood-Sobolev constant C(N, mu) for t = r = 2N/(2N-mu)."""
    N, mu = params.N, params.mu
    if not mu < N:
        raise DomainError("hls_constant requires mu < N")
    lg = (0.5 * mu * math.log(math.pi) + log_gamma(N / 2 - mu / 2) - log_gamma(N - mu / 2)
          + (-1 + mu / N) * (log_gamma(N / 2) - log_gamma(N)))
    return math.exp(lg)


def riesz_factor(N: int, s: float) -> float:
    """I(s) with int |x-y|^{-2s} (1+|y|^2)^{-(N-s)} dy = I(s) (1+|x|^2)^{-s}."""
    if not (0 < s < N / 2):
        raise DomainError(f"riesz_factor requires 0 < s < N/2, got s={s}")
    return math.exp(0.5 * N * math.log(math.pi) + log_gamma((N - 2 * s) / 2) - log_gamma(N - s))


def sobolev_constant(N: int) -> float:
    """Sharp Sobolev constant S = pi N (N-2) (Gamma(N/2)/Gamma(N))^{2/N}."""
    return math.pi * N * (N - 2) * math.exp((2.0 / N) * (log_gamma(N / 2) - log_gamma(N)))


def alpha_coeff(params: ProblemParams) -> float:
    """Bubble amplitude alpha_{N,mu}, calibrated so that U solves the limit equation.

    With lambda = 1 the equation -Delta U = (|x|^-mu * U^{2*}) U^{2*-1} reduces to
    alpha^{2(2*-1)} I(mu/2) = alpha N(N-2).
    """
    N, mu = params.N, params.mu
    expo = (N - 2) / (2.0 * (N - mu + 2))
    return math.exp(expo * (math.log(N * (N - 2)) - math.log(riesz_factor(N, mu / 2))))


def alpha_from_sobolev(params: ProblemParams, S: float) -> float:
    """The alpha display written in terms of S and C(N, mu)."""
    N, mu = params.N, params.mu
    e_s = (N - mu) * (2 - N) / (4.0 * (N - mu + 2))
    e_c = (2 - N) / (2.0 * (N - mu + 2))
    return S ** e_s * hls_constant(params) ** e_c * (N * (N - 2)) ** ((N - 2) / 4.0)


def _sobolev_backsolved(params: ProblemParams, alpha: float) -> float:
    N, mu = params.N, params.mu
    e_s = (N - mu) * (2 - N) / (4.0 * (N - mu + 2))
    e_c = (2 - N) / (2.0 * (N - mu + 2))
    rest = hls_constant(params) ** e_c * (N * (N - 2)) ** ((N - 2) / 4.0)
    return (alpha / rest) ** (1.0 / e_s)


def i_alpha_m(alpha: float, m: float) -> float:
    """I^alpha_m = int_0^inf rho^alpha (1+rho^2)^{-m} d rho = B((a+1)/2, m-(a+1)/2)/2."""
    if not alpha + 1 < 2 * m:
        raise DivergenceError(f"I^{alpha}_{m} diverges (need alpha + 1 < 2m)")
    if not alpha > -1:
        raise DivergenceError(f"I^{alpha}_{m} diverges at the origin (need alpha > -1)")
    a = (alpha + 1) / 2.0
    return 0.5 * math.exp(log_beta(a, m - a))


def b0_geometric(N: int) -> float:
    """Constant B0 with sum_{j>=2} |xi_j - xi_1|^{-(N-2)} ~ B0 k^{N-2} / r^{N-2}."""
    if N < 5:
        raise ParameterError("b0_geometric requires N >= 5")
    return 2.0 * zeta(N - 2) / (2.0 * math.pi) ** (N - 2)


@dataclass(frozen=True)
class EnergyConstants:
    """All constants entering the reduced energy expansion.

    c1_grad is the order-(N+1) integral of the gradient term (identically zero
    by scale invariance); c1_half is the order-(N+4)/2 integral appearing in the
    Choquard derivative term, equal to -(N-2)/(N+2) c2.
    """

    alpha: float
    riesz_factor: float
    d_frak: float
    c_big: float
    d_big: float
    a_const: float
    b1: float
    b2: float
    c1_grad: float
    c1_half: float
    c2: float
    b0_geom: float
    hls: float
    sobolev_s: float

    @property
    def c1(self) -> float:
        return self.c1_grad

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


@lru_cache(maxsize=64)
def energy_constants(params: ProblemParams) -> EnergyConstants:
    N, mu = params.N, params.mu
    ts = params.two_star_mu
    alpha = alpha_coeff(params)
    rf = riesz_factor(N, mu / 2)
    # d_frak multiplies (lambda/(1+lambda^2|x-xi|^2))^{mu/2}; the convolved power
    # U^{2*} carries alpha^{2*}
    d_frak = alpha ** ts * rf
    pref = d_frak * alpha ** ts
    c_big = pref * radial_integral(N, N)
    d_big = pref * radial_integral(N, (N + 2) / 2)
    omega = sphere_area(N - 1)
    c1_grad = omega * (i_alpha_m(N - 1, N + 1) - i_alpha_m(N + 1, N + 1))
    c1_half = omega * (i_alpha_m(N - 1, (N + 4) / 2) - i_alpha_m(N + 1, (N + 4) / 2))
    c2 = radial_integral(N, (N + 2) / 2)
    return EnergyConstants(
        alpha=alpha,
        riesz_factor=rf,
        d_frak=d_frak,
        c_big=c_big,
        d_big=d_big,
        a_const=0.5 * (1 - 1 / ts) * c_big,
        b1=0.5 * alpha ** 2 * radial_integral(N, N - 2),
        b2=0.5 * d_big,
        c1_grad=c1_grad,
        c1_half=c1_half,
        c2=c2,
        b0_geom=b0_geometric(N),
        hls=hls_constant(params),
        sobolev_s=_sobolev_backsolved(params, alpha),
    )
