"""Numerical checks of the weighted-norm estimates and the auxiliary inequalities.

Sup norms over R^N are estimated from below by maximizing over a structured
candidate set refined with a coordinate pattern search.  The inequality
checkers report the smallest constant C that the sampled points require,
together with its growth when the sample is doubled.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .constants import ProblemParams, energy_constants
from .errors import DivergenceError, ParameterError
from .geometry import BubbleConfig, _points
from .nonlocal_energy import TAU, error_term_eval, pair_interaction, star_weight
from .quadrature import integrate_radial, integrate_two_center

GROWTH_TOL = 0.05


# ---------------------------------------------------------------------------
# weighted norms

@dataclass(frozen=True)
class WeightedNormSpec:
    """Weight lam^{-lambda_power} sum_j (1 + lam |x - xi_j|)^{-exponent}.

    ``star`` uses exponent (N-2)/2 + tau, ``star_star`` uses (N+2)/2 + tau.
    """

    kind: str
    N: int
    tau: float = TAU

    def __post_init__(self):
        if self.kind not in ("star", "star_star"):
            raise ParameterError(f"unknown weight kind {self.kind!r}")
        if not self.tau > 0:
            raise ParameterError("tau must be positive")

    @property
    def _base(self) -> float:
        return (self.N - 2) / 2 if self.kind == "star" else (self.N + 2) / 2

    @property
    def exponent(self) -> float:
        return self._base + self.tau

    @property
    def lambda_power(self) -> float:
        return -self._base

    def weight(self, config: BubbleConfig, x):
        return star_weight(config, x, self.kind, self.tau)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    argmax: np.ndarray
    evaluations: int
    converged: bool

    def __float__(self) -> float:
        return float(self.value)


def _fold(config: BubbleConfig, pts: np.ndarray) -> np.ndarray:
    """Map points into (x1, x2, |x''|, 0, ...) with planar angle in [0, pi/k]."""
    N, k = config.N, config.k
    out = np.zeros_like(pts)
    rad = np.hypot(pts[:, 0], pts[:, 1])
    ang = np.arctan2(pts[:, 1], pts[:, 0]) % (2.0 * np.pi / k)
    ang = np.where(ang > np.pi / k, 2.0 * np.pi / k - ang, ang)
    out[:, 0] = rad * np.cos(ang)
    out[:, 1] = rad * np.sin(ang)
    out[:, 2] = np.sqrt(np.sum(pts[:, 2:N] ** 2, axis=1))
    return out


def _directions(config: BubbleConfig, symmetric: bool) -> np.ndarray:
    N = config.N
    n = 3 if symmetric else N
    eye = np.eye(N)[:n]
    return np.concatenate([eye, -eye])


def candidate_points(config: BubbleConfig, far_samples: int = 64, seed: int = 0,
                     symmetric: bool = False) -> np.ndarray:
    """Centers, pair midpoints, rings of radii lam^{-1}{1/2,1,2,4}, the axis and far points."""
    N, k, lam, r = config.N, config.k, config.lam, config.r
    C = config.centers
    groups = [C]
    if k > 1:
        i, j = np.triu_indices(k, 1)
        groups.append(0.5 * (C[i] + C[j]))
        ang = (2.0 * np.arange(k) + 1.0) * np.pi / k
        arc = np.zeros((k, N))
        arc[:, 0], arc[:, 1] = r * np.cos(ang), r * np.sin(ang)
        groups.append(arc)
    dirs = _directions(config, symmetric)
    for rho in np.array([0.5, 1.0, 2.0, 4.0]) / lam:
        groups.append((C[:, None, :] + rho * dirs[None, :, :]).reshape(-1, N))
    heights = np.concatenate([[0.0], r * np.geomspace(1e-3, 1e2, 26)])
    axis = np.zeros((len(heights), N))
    axis[:, 2] = heights
    groups.append(axis)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((far_samples, N))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    groups.append(g * (r * 10.0 ** rng.uniform(0.0, 2.0, far_samples))[:, None])
    pts = np.concatenate(groups)
    if symmetric:
        pts = _fold(config, pts)
    return pts


class _Objective:
    def __init__(self, f, spec, config, budget):
        self.f, self.spec, self.config, self.left = f, spec, config, budget
        self.evaluations = 0
        self.best = -np.inf
        self.argmax = None

    def __call__(self, pts):
        vals = np.abs(np.asarray(self.f(pts), dtype=float)) / self.spec.weight(self.config, pts)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        self.evaluations += len(pts)
        self.left -= len(pts)
        i = int(np.argmax(vals))
        if vals[i] > self.best:
            self.best, self.argmax = float(vals[i]), pts[i].copy()
        return vals


def _evaluate(obj: _Objective, pts) -> tuple[np.ndarray, np.ndarray, bool]:
    if len(pts) > obj.left:
        pts = pts[:max(obj.left, 0)]
        vals = obj(pts) if len(pts) else np.zeros(0)
        return pts, vals, False
    return pts, obj(pts), True


def _pattern_search(obj: _Objective, starts, vals, dirs, config, max_iter=60, shrink=1e-4):
    if len(starts) == 0:
        return True
    x = starts.copy()
    fx = vals.copy()
    dist = np.min(np.linalg.norm(x[:, None, :] - config.centers[None], axis=-1), axis=1)
    step = np.maximum(0.5 / config.lam, 0.25 * dist)
    stop = shrink * step
    nd, N = len(dirs), config.N
    for _ in range(max_iter):
        active = step > stop
        if not np.any(active):
            return True
        cand = (x[active][:, None, :] + step[active][:, None, None] * dirs[None]).reshape(-1, N)
        if len(cand) > obj.left:
            return False
        fc = obj(cand).reshape(-1, nd)
        best = np.argmax(fc, axis=1)
        fb = fc[np.arange(len(fc)), best]
        idx = np.flatnonzero(active)
        up = fb > fx[idx]
        moved = idx[up]
        x[moved] = cand.reshape(-1, nd, N)[up, best[up]]
        fx[moved] = fb[up]
        step[idx[~up]] *= 0.5
    return True


def _polish(obj: _Objective, config: BubbleConfig, symmetric: bool, max_evals: int = 400) -> bool:
    """Nelder-Mead from the incumbent; coordinate steps stall on diagonal ridges."""
    if obj.argmax is None or obj.best <= 0 or obj.left < 50:
        return obj.argmax is None or obj.best <= 0
    N = config.N
    n = 3 if symmetric else N
    x0 = obj.argmax.copy()

    def embed(y):
        x = x0.copy()
        x[:n] = y
        return x[None, :]

    def fun(y):
        if obj.left <= 0:
            return 0.0
        return -float(obj(embed(y))[0])

    h = 0.05 * max(float(np.min(np.linalg.norm(config.centers - x0, axis=1))), 1.0 / config.lam)
    simplex = np.vstack([x0[:n], x0[:n] + h * np.eye(n)])
    minimize(fun, x0[:n], method="Nelder-Mead",
             options={"initial_simplex": simplex, "maxfev": min(max_evals, obj.left),
                      "xatol": 1e-12 / config.lam, "fatol": 1e-15 * obj.best})
    return obj.left > 0


def weighted_norm_estimate(f, spec: WeightedNormSpec, config: BubbleConfig,
                           sampling_budget: int = 20000, seed: int = 0,
                           extra_points=None, symmetric: bool = False, refine: int = 8,
                           far_samples: int = 64, polish: bool = True) -> NormEstimate:
    """Lower estimate of sup |f| / weight.

    ``f`` maps an (n, N) array to n values.  ``symmetric`` restricts the search to
    the fundamental region (x1, x2, |x''|) with angle in [0, pi/k], which is exact
    for functions sharing the symmetry of the configuration.  The structured set is
    searched and refined first; ``extra_points`` are evaluated and refined
    afterwards, so adding them can only raise the estimate.  ``polish`` runs a
    short Nelder-Mead from the incumbent after each set.
    """
    if spec.N != config.N:
        raise ParameterError("weight spec and configuration disagree on N")
    obj = _Objective(f, spec, config, int(sampling_budget))
    dirs = _directions(config, symmetric)
    converged = True
    sets = [candidate_points(config, far_samples, seed, symmetric)]
    if extra_points is not None:
        extra = np.atleast_2d(_points(extra_points, config.N)).astype(float)
        sets.append(_fold(config, extra) if symmetric else extra)
    for pts in sets:
        pts, vals, ok = _evaluate(obj, pts)
        converged &= ok
        if not ok:
            break
        top = np.argsort(-vals, kind="stable")[:refine]
        top = top[vals[top] > 0]
        if not _pattern_search(obj, pts[top], vals[top], dirs, config):
            converged = False
            break
        if polish and not _polish(obj, config, symmetric):
            converged = False
            break
    value = max(obj.best, 0.0)
    argmax = obj.argmax if obj.argmax is not None else config.centers[0].copy()
    return NormEstimate(value, argmax, obj.evaluations, converged)


# ---------------------------------------------------------------------------
# slope fits

@dataclass(frozen=True)
class SlopeFit:
    """Least-squares line through (log x, log y) points."""

    points: list
    slope: float
    intercept: float
    r_squared: float
    degenerate: bool = False
    monotone: bool = True

    def __post_init__(self):
        if len(self.points) < 4:
            raise ParameterError("a slope fit needs at least 4 points")
        if not (self.degenerate or 0.0 <= self.r_squared <= 1.0):
            raise ParameterError("r_squared must lie in [0, 1]")

    @property
    def flag(self) -> str:
        if self.degenerate:
            return "degenerate_zero"
        return "ok" if self.monotone else "non_monotone"


def fit_loglog(x, y) -> SlopeFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pts = [(float(a), float(b)) for a, b in zip(np.log(x), np.log(np.where(y > 0, y, np.nan)))]
    if np.all(y == 0):
        return SlopeFit(pts, math.nan, math.nan, math.nan, degenerate=True)
    if np.any(y <= 0):
        raise ParameterError("log-log fit needs positive values (or all zero)")
    lx, ly = np.log(x), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss == 0 else min(max(1.0 - float(np.sum(resid ** 2)) / ss, 0.0), 1.0)
    order = np.argsort(x)
    mono = bool(np.all(np.diff(y[order]) <= 0) or np.all(np.diff(y[order]) >= 0))
    return SlopeFit(pts, float(slope), float(intercept), r2, monotone=mono)


def default_lambda_grid(k: int, N: int, L0: float = 0.5, L1: float = 8.0, n: int = 5) -> list:
    """Log-spaced lambdas across [L0, L1] k^{(N-2)/(N-4)} (more than a decade)."""
    s = float(k) ** ((N - 2) / (N - 4))
    return list(np.geomspace(L0 * s, L1 * s, n))


def error_decay_slope(k: int, potential, lambda_grid=None, config_builder=None,
                      params: ProblemParams | None = None, r: float = 1.0,
                      sampling_budget: int = 20000, seed: int = 0,
                      return_norms: bool = False):
    """Fit log ||E||_** against log lambda for the pure ansatz (mu = 4 only)."""
    params = params or ProblemParams(5, 4.0)
    if not params.exact_quadratic:
        raise ParameterError("error_decay_slope needs mu = 4")
    grid = list(lambda_grid) if lambda_grid is not None else default_lambda_grid(k, params.N)
    if config_builder is None:
        def config_builder(lam):
            return BubbleConfig(params, k, r, lam)
    spec = WeightedNormSpec("star_star", params.N)
    norms = []
    for lam in grid:
        cfg = config_builder(lam)

        def f(pts, cfg=cfg):
            return error_term_eval(cfg, potential, pts).value

        # the pattern search is accurate to ~1e-4, far inside what the fit can resolve;
        # single-point polishing of E costs k^2 convolutions per call
        est = weighted_norm_estimate(f, spec, cfg, sampling_budget, seed, symmetric=True,
                                     polish=False)
        norms.append(est.value)
    fit = fit_loglog(grid, norms)
    return (fit, norms) if return_norms else fit


def interaction_asymptotics(params: ProblemParams, separations=None, tol: float = 1e-10):
    """Slope of the pair interaction against separation and its ratio to D/s^{N-2}."""
    seps = np.asarray(separations if separations is not None else np.geomspace(16, 256, 5))
    N = params.N
    vals = []
    for s in seps:
        xj = np.zeros(N)
        xj[0] = s
        vals.append(pair_interaction(params, 1.0, np.zeros(N), xj, tol=tol).value)
    vals = np.asarray(vals)
    fit = fit_loglog(seps, vals)
    ratio = float(vals[-1] * seps[-1] ** (N - 2) / energy_constants(params).d_big)
    return fit, ratio, vals


# ---------------------------------------------------------------------------
# inequality checkers

@dataclass(frozen=True)
class InequalityCheck:
    """Smallest constant required by the sample, and its growth under doubling."""

    name: str
    params: dict
    C_witness: float
    C_half: float
    passed: bool
    argmax: object = None
    info: dict = field(default_factory=dict)

    @property
    def growth(self) -> float:
        return self.C_witness / self.C_half - 1.0 if self.C_half > 0 else math.inf

    def __iter__(self):
        return iter((self.C_witness, self.passed))


def _stable(c_full: float, c_half: float) -> bool:
    return bool(np.isfinite(c_full) and c_full > 0 and c_half > 0
                and c_full <= (1.0 + GROWTH_TOL) * c_half)


def _two_center_ratio(x, xi_i, xi_j, alpha, beta, sigma):
    a = np.linalg.norm(x - xi_i, axis=-1)
    b = np.linalg.norm(x - xi_j, axis=-1)
    d = float(np.linalg.norm(xi_i - xi_j))
    lhs = (1 + a) ** (-alpha) * (1 + b) ** (-beta)
    g = alpha + beta - sigma
    rhs = d ** (-sigma) * ((1 + a) ** (-g) + (1 + b) ** (-g))
    return lhs / rhs


def check_two_center_inequality(alpha: float, beta: float, sigma: float, xi_i, xi_j,
                                sample_count: int = 4000, seed: int = 0) -> InequalityCheck:
    """Witness for f_ij <= C |xi_i - xi_j|^{-sigma} ((1+|x-xi_i|)^{-g} + (1+|x-xi_j|)^{-g})."""
    if not (alpha >= 1 and beta >= 1 and 0 < sigma <= min(alpha, beta)):
        raise ParameterError("need alpha >= 1, beta >= 1 and 0 < sigma <= min(alpha, beta)")
    xi_i = np.asarray(xi_i, dtype=float)
    xi_j = np.asarray(xi_j, dtype=float)
    if xi_i.shape != xi_j.shape or np.linalg.norm(xi_i - xi_j) == 0:
        raise ParameterError("centers must be distinct points of the same dimension")
    N = len(xi_i)
    d = float(np.linalg.norm(xi_i - xi_j))
    rng = np.random.default_rng(seed)
    n = 2 * int(sample_count)
    # heavy-tailed offsets around the two centers and the segment between them
    anchor = rng.integers(0, 3, n)
    base = np.where(anchor[:, None] == 0, xi_i, np.where(anchor[:, None] == 1, xi_j,
                    xi_i + rng.uniform(0, 1, (n, 1)) * (xi_j - xi_i)))
    u = rng.standard_normal((n, N))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    x = base + u * (d * np.abs(rng.standard_cauchy(n)))[:, None]
    ratio = _two_center_ratio(x, xi_i, xi_j, alpha, beta, sigma)

    def witness(m):
        i = int(np.argmax(ratio[:m]))
        res = minimize(lambda y: -_two_center_ratio(y, xi_i, xi_j, alpha, beta, sigma),
                       x[i], method="Nelder-Mead",
                       options={"xatol": 1e-10 * max(d, 1.0), "fatol": 1e-14, "maxiter": 4000})
        return max(float(ratio[i]), -float(res.fun)), res.x

    c_half, _ = witness(n // 2)
    c_full, xm = witness(n)
    return InequalityCheck("two_center", {"alpha": alpha, "beta": beta, "sigma": sigma, "d": d},
                           c_full, c_half, _stable(c_full, c_half), xm)


def convolution_lhs(alpha: float, eta: float, mu: float, N: int, z: float,
                    tol: float = 1e-9, budget: int = 2_000_000) -> float:
    """int_{R^N} |y|^{-mu} (1 + |z e_1 - y|)^{-(alpha + eta)} dy."""
    p = alpha + eta
    tp = min(max(1.0, 1.0 / (p + mu - N)), 8.0)
    if z == 0.0:
        return integrate_radial(lambda s: s ** (-mu) * (1 + s) ** (-p), N, tol=0.0,
                                rel_tol=tol, budget=budget, tail_power=tp).value
    zb = np.zeros(N)
    zb[0] = z

    def g(s, t):
        return s ** (-mu) * (1 + t) ** (-p)

    return integrate_two_center(g, np.zeros(N), zb, N, tol=0.0, rel_tol=tol,
                                scale=min(1.0, z), budget=budget, tail_power=tp).value


def check_convolution_bound(alpha: float, eta: float, mu: float, N: int, lambda_offsets=None,
                            tol: float = 1e-8, slope_from: float = 100.0) -> InequalityCheck:
    """Witness for the Riesz bound C (1 + |z|)^{-(alpha - N + mu)} at offsets |z|.

    Stability: the witness over the offsets must not grow by more than 5% when
    the offset grid is refined (midpoints in log scale) and the quadrature
    tolerance is tightened tenfold.  The info dict carries the far-field slope
    of log LHS against log(1 + |z|) over offsets >= ``slope_from``.
    """
    if not eta > 0:
        raise ParameterError("eta must be positive")
    if alpha < N - mu:
        raise ParameterError("need alpha >= N - mu")
    if not 0 < mu < N:
        raise ParameterError("need 0 < mu < N")
    if alpha + eta + mu <= N:
        raise DivergenceError("integrand is not integrable at infinity")
    z = np.asarray(lambda_offsets if lambda_offsets is not None
                   else np.concatenate([[0.0], np.geomspace(0.1, 1e3, 13)]), dtype=float)
    z = np.sort(np.abs(z))
    expo = alpha - N + mu
    lhs = np.array([convolution_lhs(alpha, eta, mu, N, float(t), tol) for t in z])
    c_coarse = float(np.max(lhs * (1 + z) ** expo))
    pos = z[z > 0]
    mids = np.sqrt(pos[:-1] * pos[1:])
    if len(pos) < len(z):
        mids = np.concatenate([[0.5 * pos[0]], mids]) if len(pos) else mids
    lhs_mid = np.array([convolution_lhs(alpha, eta, mu, N, float(t), tol / 10) for t in mids])
    lhs_fine = np.array([convolution_lhs(alpha, eta, mu, N, float(t), tol / 10) for t in z])
    c_fine = float(max(np.max(lhs_fine * (1 + z) ** expo),
                       np.max(lhs_mid * (1 + mids) ** expo) if len(mids) else 0.0))
    info = {"offsets": z.tolist(), "lhs": lhs.tolist(), "expected_slope": -expo,
            "quadrature_drift": float(np.max(np.abs(lhs_fine / lhs - 1)))}
    far = z >= slope_from
    if np.count_nonzero(far) >= 4:
        fit = fit_loglog(1 + z[far], lhs[far])
        info["slope"] = fit.slope
        info["slope_fit"] = fit
    return InequalityCheck("convolution", {"alpha": alpha, "eta": eta, "mu": mu, "N": N},
                           c_fine, c_coarse, _stable(c_fine, c_coarse), None, info)


def _power_diff(q: float, t, skip: int):
    """|1+t|^q - sum_{n<skip} binom(q, n) t^n, with a series where cancellation bites."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 0.05
    ts = np.where(small, t, 0.0)
    ser = np.zeros_like(t)
    coef = 1.0
    for n in range(1, 16):
        coef *= (q - n + 1) / n
        if n >= skip:
            ser += coef * ts ** n
    direct = np.abs(1.0 + t) ** q - 1.0 - (q * t if skip > 1 else 0.0)
    return np.where(small, ser, direct)


def _elementary_ratio(q: float, which: int, t):
    """LHS / RHS of the first (which=0) or second inequality at a = 1, b = t.

    Both sides are homogeneous of degree q in (a, b) and even under (a, b) -> (-a, -b).
    """
    bb = np.abs(np.asarray(t, dtype=float))
    if which == 0:
        lhs = np.abs(_power_diff(q, t, 1))
        rhs = np.minimum(bb ** q, bb) if q < 1 else bb + bb ** q
    else:
        lhs = np.abs(_power_diff(q, t, 2))
        rhs = bb * bb + bb ** q if q > 2 else bb ** q
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(lhs == 0, 0.0, lhs / rhs)


def check_elementary_inequalities(q: float, sample_count: int = 20000, seed: int = 0) -> dict:
    """Witnesses for ||a+b|^q - |a|^q| and its first-order remainder.

    Pairs (a, b) are drawn with Cauchy magnitudes and reduced to t = b / a.
    Returns one InequalityCheck per stated inequality ("first" only exists for
    q <= 2).  The remainder bound by |b|^q alone is unbounded for q < 1 (the
    linear term q |a|^{q-2} a b blows up as a -> 0); it is still run and fails.
    """
    if not q > 0:
        raise ParameterError("q must be positive")
    rng = np.random.default_rng(seed)
    n = 2 * int(sample_count)
    a = rng.standard_cauchy(n)
    b = np.abs(a) * rng.standard_cauchy(n) * rng.standard_cauchy(n)
    t = b / a
    out = {}
    for which, name in ((0, "first"), (1, "second")):
        if which == 0 and q > 2:
            continue
        ratio = _elementary_ratio(q, which, t)

        def witness(m):
            i = int(np.argmax(ratio[:m]))
            c = float(ratio[i])
            # local refinement in log|t| within a factor 2 of the best sample
            lt = math.log(abs(t[i])) if t[i] != 0 else 0.0
            sg = 1.0 if t[i] >= 0 else -1.0
            res = minimize_scalar(lambda u: -float(_elementary_ratio(q, which, sg * math.exp(u))),
                                  bounds=(lt - math.log(2), lt + math.log(2)), method="bounded",
                                  options={"xatol": 1e-12})
            return max(c, -float(res.fun)), (float(a[i]), float(b[i]))

        c_half, _ = witness(n // 2)
        c_full, arg = witness(n)
        out[name] = InequalityCheck(f"elementary_{name}", {"q": q}, c_full, c_half,
                                    _stable(c_full, c_half), arg)
    return out


# ---------------------------------------------------------------------------
# CSV emission

CHECK_COLUMNS = ("name", "value", "target", "tol", "pass")


def format_csv(columns, rows, header: str | None = None) -> str:
    """Comma separated, LF line endings, floats in shortest round-trip form."""
    from . import SCHEMA_HEADER
    buf = io.StringIO()
    buf.write((header or SCHEMA_HEADER) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def slope_rows(lambdas, norms) -> list:
    return [(float(lam), float(nv)) for lam, nv in zip(lambdas, norms)]


def checker_row(check: InequalityCheck) -> tuple:
    p = ";".join(f"{k}={v}" for k, v in check.params.items())
    return (check.name, p, check.C_witness, check.C_half, check.passed)
