"""Leading-order reduced energy F(r, lambda) and its critical points.

    F = k A + k B1 V(r) / lambda^2 - k B2 sum_{j>=2} (lambda |xi_j - xi_1|)^{-(N-2)}

The exact polygon sum equals k^{N-2} B0(k) / (lambda r)^{N-2} with the
r-independent constant B0(k) = k^{-(N-2)} sum_j (2 sin((j-1) pi / k))^{-(N-2)},
which tends to B0 = 2 zeta(N-2) / (2 pi)^{N-2}.  The asymptotic variant uses B0
instead of B0(k).  Writing lambda = Lambda k^{(N-2)/(N-4)} gives

    F = k A + k^{1 - 2(N-2)/(N-4)} G(r, Lambda),
    G = B1 V(r) / Lambda^2 - Bi / (Lambda r)^{N-2},

with the interaction coefficient Bi = B2 B0(k) (or B2 B0); G carries all the
r and Lambda dependence and is what the searches below work with.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .constants import EnergyConstants, ProblemParams, energy_constants
from .errors import ClassificationError, HypothesisError, NotInteriorError, ParameterError


def sine_sum(k: int, r: float, N: int) -> float:
    """sum_{j=2}^k (2 r sin((j-1) pi / k))^{-(N-2)}, pairing j with k + 2 - j."""
    if k < 2:
        raise ParameterError("sine_sum needs k >= 2")
    n = N - 2
    half = (k - 1) // 2
    terms = [2.0 * (2.0 * r * math.sin(j * math.pi / k)) ** (-n) for j in range(1, half + 1)]
    if k % 2 == 0:
        terms.append((2.0 * r) ** (-n))
    return math.fsum(terms)


def b0_finite(k: int, N: int) -> float:
    """k^{-(N-2)} sum_j (2 sin((j-1) pi / k))^{-(N-2)}; tends to the geometric B0."""
    return sine_sum(k, 1.0, N) / k ** (N - 2)


def lambda_scale(k: int, N: int) -> float:
    """k^{(N-2)/(N-4)}, the growth rate of the concentration."""
    return k ** ((N - 2) / (N - 4))


@dataclass(frozen=True)
class ReducedModel:
    """Everything needed to evaluate F for fixed (N, mu, k, V).

    ``variant`` is "exact" (polygon sum) or "asymptotic" (B0).  With
    ``bare_b0`` the interaction coefficient is B0 alone instead of B2 B0.
    """

    params: ProblemParams
    k: int
    potential: object
    variant: str = "exact"
    bare_b0: bool = False
    consts: EnergyConstants = field(default=None, compare=False)

    def __post_init__(self):
        if self.variant not in ("exact", "asymptotic"):
            raise ParameterError(f"unknown variant {self.variant!r}")
        if self.k < 2:
            raise ParameterError("the reduced energy needs k >= 2")
        if self.params.N <= 4:
            raise ParameterError("N must exceed 4")
        if self.consts is None:
            object.__setattr__(self, "consts", energy_constants(self.params))

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def scale(self) -> float:
        return lambda_scale(self.k, self.N)

    @property
    def b0(self) -> float:
        return b0_finite(self.k, self.N) if self.variant == "exact" else self.consts.b0_geom

    @property
    def interaction_coeff(self) -> float:
        return self.b0 if self.bare_b0 else self.consts.b2 * self.b0

    # --- F in (r, lambda) -------------------------------------------------------
    def _G_coef(self) -> float:
        # sum_j (lambda |xi_j - xi_1|)^{-n} = k^n b0 / (lambda r)^n
        return self.k * self.interaction_coeff * self.k ** (self.N - 2)

    def F(self, r, lam):
        c = self.consts
        n = self.N - 2
        V = self.potential.V(r)
        return self.k * c.a_const + self.k * c.b1 * V / lam ** 2 - self._G_coef() / (lam * r) ** n

    def grad(self, r, lam) -> np.ndarray:
        c = self.consts
        n = self.N - 2
        G = self._G_coef()
        V, dV = self.potential.V(r), self.potential.dV(r)
        Fr = self.k * c.b1 * dV / lam ** 2 + n * G * lam ** (-n) * r ** (-n - 1)
        Fl = -2.0 * self.k * c.b1 * V / lam ** 3 + n * G * lam ** (-n - 1) * r ** (-n)
        return np.array([Fr, Fl])

    def hessian(self, r, lam) -> np.ndarray:
        c = self.consts
        n = self.N - 2
        G = self._G_coef()
        V, dV, d2V = self.potential.V(r), self.potential.dV(r), self.potential.d2V(r)
        kb = self.k * c.b1
        Frr = kb * d2V / lam ** 2 - n * (n + 1) * G * lam ** (-n) * r ** (-n - 2)
        Frl = -2.0 * kb * dV / lam ** 3 - n * n * G * lam ** (-n - 1) * r ** (-n - 1)
        Fll = 6.0 * kb * V / lam ** 4 - n * (n + 1) * G * lam ** (-n - 2) * r ** (-n)
        return np.array([[Frr, Frl], [Frl, Fll]])

    # --- scaled profile G(r, Lambda) ----------------------------------------------
    def G(self, r, Lam):
        n = self.N - 2
        return self.consts.b1 * self.potential.V(r) / Lam ** 2 - self.interaction_coeff / (Lam * r) ** n

    def G_grad(self, r, Lam) -> np.ndarray:
        s = self.scale
        pref = self.k * s ** -2.0
        g = self.grad(r, Lam * s)
        return np.array([g[0] / pref, g[1] * s / pref])

    def G_hessian(self, r, Lam) -> np.ndarray:
        s = self.scale
        pref = self.k * s ** -2.0
        h = self.hessian(r, Lam * s)
        return np.array([[h[0, 0], h[0, 1] * s], [h[0, 1] * s, h[1, 1] * s * s]]) / pref

    def Lambda0(self, r) -> float:
        """Unique maximizer in Lambda of G(r, .) (needs V(r) > 0)."""
        V = float(self.potential.V(r))
        if not V > 0:
            raise HypothesisError(f"V(r) = {V} <= 0 at r = {r}: no finite maximizer in lambda")
        n = self.N - 2
        return (self.interaction_coeff * n / (2.0 * self.consts.b1 * V * r ** n)) ** (1.0 / (self.N - 4))

    def ridge_constant(self) -> float:
        """B' with max_Lambda G(r, Lambda) = B' (r^2 V(r))^{(N-2)/(N-4)}."""
        N = self.N
        b1 = self.consts.b1
        bi = self.interaction_coeff
        return (N - 4) / (N - 2) * b1 * (2.0 * b1 / ((N - 2) * bi)) ** (2.0 / (N - 4))

    def ridge_exponent(self) -> float:
        return (self.N - 2) / (self.N - 4)


def reduced_F(k, r, lam, potential, consts: EnergyConstants | None = None, params=None,
              variant: str = "exact", bare_b0: bool = False) -> float:
    return _model(k, potential, consts, params, variant, bare_b0).F(r, lam)


def reduced_F_dlambda(k, r, lam, potential, consts: EnergyConstants | None = None, params=None,
                      variant: str = "exact", bare_b0: bool = False) -> float:
    return float(_model(k, potential, consts, params, variant, bare_b0).grad(r, lam)[1])


def _model(k, potential, consts, params, variant, bare_b0) -> ReducedModel:
    if params is None:
        raise ParameterError("params (N, mu) are required")
    return ReducedModel(params, int(k), potential, variant, bare_b0,
                        consts if consts is not None else energy_constants(params))


@dataclass(frozen=True)
class LambdaStar:
    Lambda0: float
    lambda_asymptotic: float
    lambda_refined: float
    newton_iterations: int


def lambda_star(r: float, k: int, potential, params: ProblemParams,
                bare_b0: bool = False) -> LambdaStar:
    """Lambda0(r) from the B0 asymptote, and the Newton root of dF/dlambda with the exact sum."""
    asym = ReducedModel(params, k, potential, "asymptotic", bare_b0)
    exact = ReducedModel(params, k, potential, "exact", bare_b0)
    L0 = asym.Lambda0(r)
    lam = L0 * asym.scale
    # Newton on log(lambda): dF/dlambda changes sign exactly once
    t = math.log(lam)
    it = 0
    for it in range(1, 100):
        lam = math.exp(t)
        g = exact.grad(r, lam)[1]
        h = exact.hessian(r, lam)[1, 1]
        dt = -g / (h * lam + g)
        dt = max(min(dt, 1.0), -1.0)
        t += dt
        if abs(dt) < 1e-15:
            break
    return LambdaStar(L0, L0 * asym.scale, math.exp(t), it)


def along_ridge_profile(r: float, k: int, potential, params: ProblemParams,
                        variant: str = "asymptotic", bare_b0: bool = False) -> float:
    """B1 V / lambda^2 - Bi k^{N-2} / (lambda r)^{N-2} at lambda = Lambda0(r) k^{(N-2)/(N-4)}."""
    m = ReducedModel(params, k, potential, variant, bare_b0)
    s = m.scale
    lam = m.Lambda0(r) * s
    n = params.N - 2
    V = float(potential.V(r))
    return m.consts.b1 * V / lam ** 2 - m.interaction_coeff * k ** n / (lam * r) ** n


# ---------------------------------------------------------------------------
# domain and critical points

@dataclass(frozen=True)
class ReducedEnergyDomain:
    """D = {r in [r0 - delta, r0 + delta], Lambda in [Lambda0(r) - delta1, Lambda0(r) + delta1]}."""

    r0: float
    delta: float
    delta1: float
    Lambda0: Callable = field(compare=False)

    @property
    def r_lo(self) -> float:
        return self.r0 - self.delta

    @property
    def r_hi(self) -> float:
        return self.r0 + self.delta

    def Lambda_lo(self, r) -> float:
        return self.Lambda0(r) - self.delta1

    def Lambda_hi(self, r) -> float:
        return self.Lambda0(r) + self.delta1

    def contains(self, r, Lam, strict: bool = False) -> bool:
        if strict:
            return self.r_lo < r < self.r_hi and self.Lambda_lo(r) < Lam < self.Lambda_hi(r)
        return self.r_lo <= r <= self.r_hi and self.Lambda_lo(r) <= Lam <= self.Lambda_hi(r)


def delta1_for(k: int, N: int, theta: float) -> float:
    return k ** (-(1.5 * theta) * (N - 2) / (N - 4))


def profile_extremum_or_raise(potential, kind: str, lo: float, hi: float) -> float:
    r0 = potential.profile_extremum(kind, lo, hi)
    if r0 is None:
        raise HypothesisError(
            f"r^2 V(r) has no interior {'maximum' if kind == 'max' else 'minimum'} on [{lo:g}, {hi:g}]")
    if not float(potential.V(r0)) > 0:
        raise HypothesisError(f"V(r0) = {float(potential.V(r0))} is not positive")
    return r0


def default_search_window(potential) -> tuple:
    if potential.family == "tabulated":
        return float(potential.table[0][0]), float(potential.table[-1][0])
    return 0.5 * potential.r0, 1.5 * potential.r0


def build_domain(model: ReducedModel, case: str, delta: float | None = None,
                 theta: float = 0.05, window: tuple | None = None) -> ReducedEnergyDomain:
    if case not in ("max", "saddle"):
        raise ParameterError(f"case must be 'max' or 'saddle', got {case!r}")
    lo, hi = window if window is not None else default_search_window(model.potential)
    r0 = profile_extremum_or_raise(model.potential, "max" if case == "max" else "min", lo, hi)
    delta = 0.1 * r0 if delta is None else delta
    d1 = delta1_for(model.k, model.N, theta)
    return ReducedEnergyDomain(r0, delta, d1, model.Lambda0)


@dataclass
class SaddleBracket:
    alpha1: float
    alpha2: float
    eta: float
    b_prime: float
    level: float
    b_prime_fit: float = float("nan")
    alpha1_half_exponent: float = float("nan")
    # the same three numbers with k A removed and divided by k s^{-2}; at large k the
    # absolute values differ from -k A only in the last few digits
    reduced: tuple = (float("nan"), float("nan"), float("nan"))

    @property
    def holds(self) -> bool:
        a1, c, a2 = self.reduced
        if not np.isnan(c):
            return a1 < c < a2
        return self.alpha1 < self.level < self.alpha2


@dataclass
class CriticalPoint:
    r: float
    Lambda: float
    lam: float
    F: float
    classification: str
    grad: np.ndarray
    hessian: np.ndarray
    hessian_eigs: np.ndarray
    bracket: SaddleBracket | None = None
    iterations: int = 0

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.grad))

    def to_dict(self) -> dict:
        b = self.bracket
        return {
            "r_star": self.r,
            "Lambda_star": self.Lambda,
            "lambda_star": self.lam,
            "F_star": self.F,
            "classification": self.classification,
            "grad_norm": self.grad_norm,
            "hessian_eigs": [float(v) for v in self.hessian_eigs],
            "bracket": {
                "alpha1": None if b is None else b.alpha1,
                "c": None if b is None else b.level,
                "alpha2": None if b is None else b.alpha2,
                "eta": None if b is None else b.eta,
                "b_prime": None if b is None else b.b_prime,
                "alpha1_half_exponent": None if b is None else b.alpha1_half_exponent,
            },
        }


def _newton(model: ReducedModel, r: float, Lam: float, maximize: bool | None,
            max_iter: int = 200, tol: float = 1e-13):
    """Newton on grad G = 0 in (r, Lambda) with a trust-region safeguard."""
    radius = 0.25 * min(r, Lam)
    it = 0
    for it in range(1, max_iter + 1):
        g = model.G_grad(r, Lam)
        H = model.G_hessian(r, Lam)
        scale = abs(model.G(r, Lam)) + 1e-300
        if np.linalg.norm(g) * max(r, Lam) <= tol * scale:
            break
        try:
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = -g
        if maximize is True and np.any(np.linalg.eigvalsh(H) >= 0):
            # not yet in the concave basin: take a gradient ascent step instead
            step = g / (np.linalg.norm(g) + 1e-300) * radius
        nrm = np.linalg.norm(step)
        if nrm > radius:
            step *= radius / nrm
        rn, Ln = r + step[0], Lam + step[1]
        if rn <= 0 or Ln <= 0:
            radius *= 0.25
            continue
        gn = model.G_grad(rn, Ln)
        if np.linalg.norm(gn) < np.linalg.norm(g):
            r, Lam = rn, Ln
            radius = min(2.0 * radius, 0.5 * min(r, Lam))
        else:
            radius *= 0.25
            if radius < 1e-16 * max(r, Lam):
                break
    return r, Lam, it


def _finalize(model: ReducedModel, r, Lam, it, classification) -> CriticalPoint:
    lam = Lam * model.scale
    H = model.hessian(r, lam)
    return CriticalPoint(r, Lam, lam, float(model.F(r, lam)), classification,
                         model.grad(r, lam), H, np.linalg.eigvalsh(H), iterations=it)


def find_critical_point(case: str, model: ReducedModel, domain: ReducedEnergyDomain | None = None,
                        eta: float = 0.01, grid: int = 41, theta: float = 0.05,
                        delta: float | None = None) -> CriticalPoint:
    """Interior max (Case max) or saddle (Case saddle) of F over the domain D."""
    if domain is None:
        domain = build_domain(model, case, delta=delta, theta=theta)
    if case == "max":
        rs = np.linspace(domain.r_lo, domain.r_hi, grid)
        best = None
        for i, r in enumerate(rs):
            L0 = domain.Lambda0(r)
            Ls = np.linspace(L0 - domain.delta1, L0 + domain.delta1, grid)
            Ls = Ls[Ls > 0]
            vals = model.G(r, Ls)
            j = int(np.argmax(vals))
            if best is None or vals[j] > best[0]:
                best = (vals[j], i, j, r, Ls[j], len(Ls))
        _, i, j, r, Lam, nL = best
        if i in (0, grid - 1) or j in (0, nL - 1):
            raise NotInteriorError(f"maximum of F on D lies on the boundary (r={r:.6g}, Lambda={Lam:.6g})")
        r, Lam, it = _newton(model, r, Lam, maximize=True)
        if not domain.contains(r, Lam, strict=True):
            raise NotInteriorError("Newton left the domain D")
        cp = _finalize(model, r, Lam, it, "max")
        if not np.all(cp.hessian_eigs < 0):
            raise ClassificationError(f"Hessian eigenvalues {cp.hessian_eigs} are not both negative")
        return cp
    if case != "saddle":
        raise ParameterError(f"case must be 'max' or 'saddle', got {case!r}")
    r, Lam, it = _newton(model, domain.r0, domain.Lambda0(domain.r0), maximize=None)
    if not domain.contains(r, Lam, strict=True):
        raise NotInteriorError("saddle search left the domain D")
    cp = _finalize(model, r, Lam, it, "saddle")
    # signature: one positive direction (mostly along r), one negative (mostly along lambda)
    w, v = np.linalg.eigh(cp.hessian)
    if not (w[0] < 0 < w[1]):
        raise ClassificationError(f"Hessian eigenvalues {w} do not have signature (+, -)")
    if abs(v[1, 0]) < abs(v[0, 0]) * 1e-3:
        raise ClassificationError("the negative direction is not along lambda")
    cp.bracket = saddle_bracket(model, cp, eta)
    return cp


def fit_ridge_constant(model: ReducedModel, r_values) -> float:
    """B' from ridge values max_Lambda G(r, .) against P(r)^{(N-2)/(N-4)} (least squares in logs)."""
    e = model.ridge_exponent()
    logs = []
    for r in r_values:
        L0 = model.Lambda0(r)
        logs.append(math.log(model.G(r, L0)) - e * math.log(float(model.potential.P(r))))
    return math.exp(float(np.mean(logs)))


def saddle_bracket(model: ReducedModel, cp: CriticalPoint, eta: float) -> SaddleBracket:
    """alpha1 < c < alpha2 for the level c = -F(saddle) of the negated energy."""
    k, N = model.k, model.N
    A = model.consts.a_const
    P0 = float(model.potential.P(cp.r))
    decay = k ** (-2.0 * (N - 2) / (N - 4))
    bp = model.ridge_constant()
    rr = cp.r * (1.0 + np.linspace(-0.02, 0.02, 9))
    bp_fit = fit_ridge_constant(model, rr)
    e = model.ridge_exponent()
    alpha1 = k * (-A - bp_fit * P0 ** e * (1.0 + eta) * decay)
    alpha1_half = k * (-A - bp_fit * P0 ** ((N - 2) / (2.0 * (N - 4))) * (1.0 - eta) * decay)
    alpha2 = k * (-A + eta)
    reduced = (-bp_fit * P0 ** e * (1.0 + eta), -float(model.G(cp.r, cp.Lambda)), eta / decay)
    return SaddleBracket(alpha1, alpha2, eta, bp, -cp.F, bp_fit, alpha1_half, reduced)
