"""Dimension-reduced quadrature for integrals over R^N with point structure.

Integrands are assumed to depend on x only through its distances to one, two or
three fixed centers.  Such an integral collapses to a 1-, 2- or 3-dimensional
one: polar radius about a center, the polar angle from the center line, and (for
three centers) one more angle measured inside the plane of the centers.  The
remaining N - 2 or N - 3 directions contribute a sphere-area factor.

Space is split between the centers with a smooth partition of unity that
switches a center off wherever another center is markedly closer.  Each piece is
integrated in polar coordinates about its own center, which absorbs integrable
power singularities there, while the integrand near the other centers is never
sampled by that piece.

The cubature itself is a globally adaptive tensor Gauss-Kronrod rule on boxes,
vectorized over all boxes of an iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .constants import sphere_area
from .errors import BudgetExceededError, DivergenceError

DEFAULT_BUDGET = 10_000_000


@dataclass
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    converged: bool = True
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not math.isfinite(self.abs_error_estimate) or self.abs_error_estimate < 0:
            raise ValueError("abs_error_estimate must be finite and >= 0")

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value,
            self.abs_error_estimate + other.abs_error_estimate,
            self.evaluations + other.evaluations,
            self.converged and other.converged,
        )

    def scaled(self, c: float) -> "QuadratureResult":
        return QuadratureResult(c * self.value, abs(c) * self.abs_error_estimate,
                                self.evaluations, self.converged, dict(self.info))


# Gauss-Kronrod pairs on [-1, 1]; the Gauss nodes are the odd-indexed Kronrod ones.
_XK15 = np.array([
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245, 0.405845151377397166906606412076961,
    0.586087235467691130294144845693013, 0.741531185599394439863864773280788,
    0.864864423359769072789712788640926, 0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK15 = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG7 = np.zeros(15)
_WG7[1::2] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
              0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
              0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
              0.129484966168869693270611432679082]

_XK7 = np.array([-0.960491268708020283423507092629080, -0.774596669241483377035853079956480,
                 -0.434243749346802558002071502844628, 0.0,
                 0.434243749346802558002071502844628, 0.774596669241483377035853079956480,
                 0.960491268708020283423507092629080])
_WK7 = np.array([0.104656226026467265193823857192073, 0.268488089868333440728569280666710,
                 0.401397414775962222905051818618432, 0.450916538658474142345110087045571,
                 0.401397414775962222905051818618432, 0.268488089868333440728569280666710,
                 0.104656226026467265193823857192073])
_WG3 = np.array([0.0, 5.0 / 9.0, 0.0, 8.0 / 9.0, 0.0, 5.0 / 9.0, 0.0])

RULES = {15: (_XK15, _WK15, _WG7), 7: (_XK7, _WK7, _WG3)}


class _TensorRule:
    def __init__(self, dim: int, order: int):
        x, wk, wg = RULES[order]
        self.dim = dim
        grids = np.meshgrid(*([x] * dim), indexing="ij")
        self.nodes = np.stack([g.ravel() for g in grids], axis=-1)  # (P, dim)

        def tensor(ws):
            out = ws[0]
            for w in ws[1:]:
                out = np.multiply.outer(out, w)
            return np.asarray(out).ravel()

        self.wk = tensor([wk] * dim)
        self.wg = tensor([wg] * dim)
        # per-dimension error probes: Kronrod everywhere, Kronrod - Gauss along d
        self.wdim = np.stack([tensor([wk - wg if e == d else wk for e in range(dim)])
                              for d in range(dim)])
        self.npts = len(self.wk)


def adaptive_cubature(f: Callable, lo, hi, tags=None, abs_tol: float = 1e-10,
                      rel_tol: float = 1e-10, budget: int = DEFAULT_BUDGET,
                      order: int = 15, max_iter: int = 400) -> QuadratureResult:
    """Globally adaptive tensor Gauss-Kronrod cubature over a list of boxes.

    ``f(tags, pts)`` receives an integer tag per point (the tag of its box) and an
    (n, dim) array of points and must return n finite values.  Boxes are split in
    half along the direction with the largest Kronrod-Gauss discrepancy.
    """
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    nbox, dim = lo.shape
    tags = np.zeros(nbox, dtype=int) if tags is None else np.asarray(tags, dtype=int)
    rule = _TensorRule(dim, order)

    def evaluate(blo, bhi, btags):
        half = 0.5 * (bhi - blo)
        mid = 0.5 * (bhi + blo)
        pts = mid[:, None, :] + half[:, None, :] * rule.nodes[None, :, :]
        vals = f(np.repeat(btags, rule.npts), pts.reshape(-1, dim))
        vals = np.asarray(vals, dtype=float).reshape(len(blo), rule.npts)
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("integrand returned non-finite values")
        vol = np.prod(half, axis=1)
        k = vals @ rule.wk * vol
        g = vals @ rule.wg * vol
        ed = np.abs(vals @ rule.wdim.T) * vol[:, None]
        return k, np.abs(k - g), ed

    vals, errs, edims = evaluate(lo, hi, tags)
    evals = nbox * rule.npts
    converged = False
    for _ in range(max_iter):
        total = float(np.sum(vals))
        err = float(np.sum(errs))
        if err <= max(abs_tol, rel_tol * abs(total)):
            converged = True
            break
        if evals >= budget:
            break
        # split the boxes carrying the top half of the error (at most 4000 at once)
        order_idx = np.argsort(-errs, kind="stable")
        cum = np.cumsum(errs[order_idx])
        nsel = int(np.searchsorted(cum, 0.5 * cum[-1]) + 1)
        room = max(1, (budget - evals) // (2 * rule.npts))
        nsel = max(1, min(nsel, 4000, room, len(order_idx)))
        sel = order_idx[:nsel]
        keep = np.ones(len(vals), dtype=bool)
        keep[sel] = False
        sdim = np.argmax(edims[sel], axis=1)
        slo, shi = lo[sel], hi[sel]
        smid = 0.5 * (slo[np.arange(nsel), sdim] + shi[np.arange(nsel), sdim])
        lo1, hi1 = slo.copy(), shi.copy()
        hi1[np.arange(nsel), sdim] = smid
        lo2, hi2 = slo.copy(), shi.copy()
        lo2[np.arange(nsel), sdim] = smid
        nlo = np.concatenate([lo1, lo2])
        nhi = np.concatenate([hi1, hi2])
        ntags = np.concatenate([tags[sel], tags[sel]])
        nv, ne, ned = evaluate(nlo, nhi, ntags)
        evals += len(nlo) * rule.npts
        lo = np.concatenate([lo[keep], nlo])
        hi = np.concatenate([hi[keep], nhi])
        tags = np.concatenate([tags[keep], ntags])
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        edims = np.concatenate([edims[keep], ned])
    # pairwise summation in a fixed box order keeps the result deterministic
    result = QuadratureResult(float(np.sum(vals)), float(np.sum(errs)), int(evals), converged,
                              {"boxes": int(len(vals))})
    if not converged:
        raise BudgetExceededError(
            f"cubature did not reach tolerance: estimate {result.value:.6e} "
            f"+- {result.abs_error_estimate:.2e} after {evals} evaluations", result)
    return result


# ---------------------------------------------------------------------------
# radial coordinate: z in [0, 1] -> rho = R z ; z in (1, 2) -> rho = R / (2 - z)^p.
# p > 1 smooths slowly decaying tails: rho^{-1-e} d rho becomes (2-z)^{p e - 1} dz.

def _rho_of_z(z, R, p: float = 1.0):
    inner = z <= 1.0
    u = np.where(inner, 1.0, 2.0 - z)
    with np.errstate(divide="ignore", over="ignore"):
        rho = np.where(inner, R * z, R / u ** p)
        jac = np.where(inner, R, p * R / u ** (p + 1))
    return rho, jac


def _finite_tail(vals, rho):
    # nodes pushed past the overflow range carry no mass
    return np.where(rho < 1e150, vals, 0.0)


def _auto_tail_power(e: float) -> float:
    return 1.0 if not np.isfinite(e) else float(min(max(1.0, 1.0 / max(e, 1e-9)), 8.0))


def _z_breaks(scale: float, R: float, ratio: float = 2.0, tail_panels: int = 10) -> np.ndarray:
    """Panel breakpoints in z, geometric toward rho = 0 and toward rho = infinity."""
    inner = [0.0]
    z = min(scale / R, 0.5)
    while z < 1.0:
        inner.append(z)
        z *= ratio
    inner.append(1.0)
    tail = [2.0 - ratio ** (-j) for j in range(1, tail_panels + 1)]
    return np.array(inner + tail + [2.0])


def _tail_exponent(phi: Callable[[np.ndarray], np.ndarray], N: int) -> float:
    """Effective decay exponent e of rho^N phi(rho) ~ rho^{-e} at large rho."""
    r = np.array([1e8, 1e10])
    v = np.abs(np.asarray(phi(r), dtype=float)) * r ** N
    if v[0] == 0.0 or v[1] == 0.0:
        return math.inf
    return -math.log(v[1] / v[0]) / math.log(r[1] / r[0])


def integrate_radial(f: Callable[[np.ndarray], np.ndarray], N: int, tol: float = 1e-10,
                     scale: float = 1.0, budget: int = DEFAULT_BUDGET,
                     rel_tol: float | None = None, breaks=None,
                     tail_power: float | None = None) -> QuadratureResult:
    """omega_{N-1} int_0^inf f(rho) rho^{N-1} d rho  (the integral of a radial profile over R^N).

    Adaptive Gauss-Kronrod on [0, R] plus the tail rho -> R / u.  ``tol`` is an
    absolute tolerance unless ``rel_tol`` is given.
    """
    e = _tail_exponent(f, N)
    if e < 1e-2:
        raise DivergenceError("radial integrand does not decay faster than rho^-N")
    if tail_power is None:
        tail_power = _auto_tail_power(e)
    omega = sphere_area(N - 1)
    R = 4.0 * scale
    zb = _merge_breaks(_z_breaks(scale, R, tail_panels=40), breaks, R)

    def integrand(_tags, pts):
        rho, jac = _rho_of_z(pts[:, 0], R, tail_power)
        with np.errstate(over="ignore", invalid="ignore"):
            return _finite_tail(omega * f(rho) * rho ** (N - 1) * jac, rho)

    return adaptive_cubature(integrand, zb[:-1, None], zb[1:, None], abs_tol=tol,
                             rel_tol=0.0 if rel_tol is None else rel_tol, budget=budget)


# ---------------------------------------------------------------------------
# multi-center reduction

@dataclass(frozen=True)
class ReductionPlan:
    """Frame for an integral whose integrand depends on distances to 1-3 centers.

    ``frame`` holds the unique centers expressed in an orthonormal basis of their
    affine hull (coordinates of length ``effective_dim - 1``, or length 0 for a
    single center); ``index`` maps every requested center to its unique slot.
    """

    centers: tuple
    effective_dim: int
    frame: np.ndarray
    index: tuple
    jacobian_spec: str


def reduction_plan(centers: Sequence, N: int, tol: float = 1e-12) -> ReductionPlan:
    pts = [np.asarray(c, dtype=float) for c in centers]
    uniq: list[np.ndarray] = []
    index = []
    scale = max(1.0, max(float(np.linalg.norm(p)) for p in pts))
    for p in pts:
        for i, q in enumerate(uniq):
            if np.linalg.norm(p - q) <= tol * scale:
                index.append(i)
                break
        else:
            index.append(len(uniq))
            uniq.append(p)
    base = uniq[0]
    diffs = np.array([u - base for u in uniq[1:]]).reshape(len(uniq) - 1, -1)
    if len(uniq) == 1:
        rank, basis = 0, np.zeros((0, len(base)))
    else:
        _, sv, vt = np.linalg.svd(diffs, full_matrices=False)
        rank = int(np.sum(sv > tol * max(sv[0], 1e-300)))
        basis = vt[:rank]
    if rank > 2:
        raise ValueError("at most three centers spanning a plane are supported")
    frame = np.array([basis @ (u - base) for u in uniq]).reshape(len(uniq), rank)
    if rank == 0:
        spec = f"radial: sphere S^{N - 1} factor"
    elif rank == 1:
        spec = f"axial: rho^(N-1) sin^(N-2)(theta), S^{N - 2} factor"
    else:
        spec = f"planar: rho^(N-1) sin^(N-2)(theta) sin^(N-3)(phi), S^{N - 3} factor"
    return ReductionPlan(tuple(tuple(map(float, c)) for c in pts), rank + 1, frame,
                         tuple(index), spec)


def _smooth_step(x, kappa):
    """C-infinity switch: 1 for x <= 1, 0 for x >= kappa."""
    a = np.clip(kappa - x, 0.0, None)
    b = np.clip(x - 1.0, 0.0, None)
    with np.errstate(divide="ignore"):
        fa = np.where(a > 0, np.exp(-1.0 / np.where(a > 0, a, 1.0)), 0.0)
        fb = np.where(b > 0, np.exp(-1.0 / np.where(b > 0, b, 1.0)), 0.0)
    return fa / (fa + fb)


def _merge_breaks(zb: np.ndarray, radii, R: float) -> np.ndarray:
    extra = []
    for rho in radii or ():
        if rho <= 0:
            continue
        extra.append(rho / R if rho <= R else 2.0 - R / rho)
    return np.unique(np.concatenate([zb, np.array(extra, dtype=float)]))


def integrate_centers(g: Callable, centers: Sequence, N: int, tol: float = 1e-10,
                      rel_tol: float = 0.0, scale: float = 1.0,
                      budget: int = DEFAULT_BUDGET, order: int | None = None,
                      breaks: Sequence | None = None, kappa: float = 2.0,
                      pou: str | None = None, power: int = 8,
                      tail_power: float | None = None) -> QuadratureResult:
    """int_{R^N} g(|x - c_1|, ..., |x - c_n|) dx for up to three centers.

    ``g`` takes one distance array per requested center (in the given order).
    ``scale`` is the smallest length on which g varies near the centers, and
    ``breaks[i]`` lists radii about center i where g has kinks or jumps.  The
    piece owned by a center vanishes wherever another center is more than
    ``kappa`` times closer, so jumps on spheres are resolved exactly when the
    spheres stay clear of the other centers.  That compact partition (``pou =
    "compact"``, the default when breaks are given) costs more on smooth
    integrands than the algebraic one, w_c proportional to t_c^{-power}.
    ``tail_power`` sets the far-field map rho = R / (2 - z)^p; by default p is
    about 1/e for integrands decaying like |x|^{-N-e}.
    """
    if pou is None:
        pou = "compact" if breaks is not None else "power"
    if pou not in ("compact", "power"):
        raise ValueError(f"unknown partition {pou!r}")
    plan = reduction_plan(centers, N)
    frame = plan.frame
    nu = len(frame)
    ubreaks: list[list[float]] = [[] for _ in range(nu)]
    for i, u in enumerate(plan.index):
        if breaks is not None and i < len(breaks) and breaks[i] is not None:
            ubreaks[u].extend(float(b) for b in breaks[i])
    if plan.effective_dim == 1:
        def radial(rho):
            return g(*([rho] * len(plan.index)))
        return integrate_radial(radial, N, tol=tol, scale=scale, budget=budget,
                                rel_tol=rel_tol or None, breaks=ubreaks[0],
                                tail_power=tail_power)
    if N < plan.effective_dim + 1:
        raise ValueError("dimension too small for this center configuration")
    dim = plan.effective_dim
    if tail_power is None:
        tail_power = _auto_tail_power(_tail_exponent(lambda r: g(*([r] * len(plan.index))), N))
    extent = max(float(np.max(np.linalg.norm(frame[:, None, :] - frame[None, :, :], axis=-1))), scale)
    R = 4.0 * extent
    if order is None:
        order = 15 if dim == 2 else 7
    zb0 = _z_breaks(scale, R, ratio=2.0 if dim == 2 else 4.0, tail_panels=10 if dim == 2 else 5)
    tb = np.linspace(0.0, math.pi, 5 if dim == 2 else 3)
    los, his, tags = [], [], []
    for piece in range(nu):
        zb = _merge_breaks(zb0, ubreaks[piece], R)
        for z0, z1 in zip(zb[:-1], zb[1:]):
            for t0, t1 in zip(tb[:-1], tb[1:]):
                if dim == 2:
                    los.append((z0, t0))
                    his.append((z1, t1))
                else:
                    los.append((z0, t0, 0.0))
                    his.append((z1, t1, math.pi))
                tags.append(piece)
    # local bases per piece: e1 toward another center, e2 completing the plane
    bases = []
    for piece in range(nu):
        others = [frame[j] - frame[piece] for j in range(nu) if j != piece]
        e1 = others[0] / np.linalg.norm(others[0])
        if dim == 3:
            bases.append(np.stack([e1, np.array([-e1[1], e1[0]])]))
        else:
            bases.append(e1.reshape(1, 1))
    bases = np.array(bases)
    ang_factor = sphere_area(N - 2) if dim == 2 else sphere_area(N - 3)

    def integrand(ptags, pts):
        n = len(ptags)
        rho, jac = _rho_of_z(pts[:, 0], R, tail_power)
        theta = pts[:, 1]
        ct, st = np.cos(theta), np.sin(theta)
        if dim == 2:
            local = ct[:, None]
            meas = rho ** (N - 1) * st ** (N - 2) * jac * ang_factor
            perp2 = (rho * st) ** 2
        else:
            cp, sp = np.cos(pts[:, 2]), np.sin(pts[:, 2])
            local = np.stack([ct, st * cp], axis=-1)
            meas = rho ** (N - 1) * st ** (N - 2) * sp ** (N - 3) * jac * ang_factor
            perp2 = (rho * st * sp) ** 2
        inplane = frame[ptags] + rho[:, None] * np.einsum("nk,nkd->nd", local, bases[ptags])
        dists = np.empty((nu, n))
        for j in range(nu):
            diff = inplane - frame[j]
            dists[j] = np.sqrt(np.sum(diff * diff, axis=1) + perp2)
        # own center: use rho exactly (avoids cancellation at tiny radii)
        dists[ptags, np.arange(n)] = rho
        dmin = np.min(dists, axis=0)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = dists / np.where(dmin > 0, dmin, 1.0)[None, :]
            if pou == "compact":
                raw = _smooth_step(ratio, kappa)
            else:
                raw = np.where(np.isfinite(ratio), ratio, np.inf) ** (-float(power))
        raw = np.where(dists == dmin[None, :], 1.0, raw)
        weight = raw[ptags, np.arange(n)] / np.sum(raw, axis=0)
        live = weight > 0
        out = np.zeros(n)
        if np.any(live):
            args = [dists[u][live] for u in plan.index]
            with np.errstate(over="ignore", invalid="ignore"):
                vals = np.asarray(g(*args), dtype=float) * weight[live] * meas[live]
            out[live] = _finite_tail(vals, rho[live])
        return out

    return adaptive_cubature(integrand, np.array(los), np.array(his), np.array(tags),
                             abs_tol=tol, rel_tol=rel_tol, budget=budget, order=order)


def integrate_two_center(g: Callable, a, b, N: int, tol: float = 1e-10, rel_tol: float = 0.0,
                         scale: float = 1.0, budget: int = DEFAULT_BUDGET,
                         breaks=None, tail_power: float | None = None) -> QuadratureResult:
    """int_{R^N} g(|x-a|, |x-b|) dx reduced to two dimensions."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.linalg.norm(a - b) == 0.0:
        raise ValueError("coincident centers: use integrate_radial")
    return integrate_centers(g, [a, b], N, tol=tol, rel_tol=rel_tol, scale=scale, budget=budget,
                             breaks=breaks, tail_power=tail_power)


def integrate_three_center(g: Callable, a, b, c, N: int, tol: float = 1e-10,
                           rel_tol: float = 0.0, scale: float = 1.0,
                           budget: int = DEFAULT_BUDGET, breaks=None) -> QuadratureResult:
    """int_{R^N} g(|x-a|, |x-b|, |x-c|) dx reduced to three dimensions.

    Collinear or partly coincident centers fall back to the axial (2D) reduction.
    """
    pts = [np.asarray(p, dtype=float) for p in (a, b, c)]
    if np.linalg.norm(pts[0] - pts[1]) == 0 and np.linalg.norm(pts[0] - pts[2]) == 0:
        raise ValueError("all centers coincide: use integrate_radial")
    return integrate_centers(g, pts, N, tol=tol, rel_tol=rel_tol, scale=scale, budget=budget,
                             breaks=breaks)


# ---------------------------------------------------------------------------
# stratified importance sampling

class BiasWarning(UserWarning):
    """Importance weights look too concentrated to trust the standard error."""


@dataclass(frozen=True)
class BubbleProposal:
    """Density q(x) = (1 + lam^2 |x - center|^2)^{-p} lam^N / J_p on R^N (needs 2p > N)."""

    center: tuple
    lam: float
    p: float

    def _norm(self, N):
        from .constants import radial_integral
        return self.lam ** N / radial_integral(N, self.p)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        N = len(c)
        u = rng.beta(N / 2, self.p - N / 2, size=n)
        rho = np.sqrt(u / (1.0 - u)) / self.lam
        d = rng.standard_normal((n, N))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return c + rho[:, None] * d

    def density(self, x: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        d2 = np.sum((x - c) ** 2, axis=-1)
        return self._norm(len(c)) * (1.0 + self.lam ** 2 * d2) ** (-self.p)


@dataclass(frozen=True)
class Stratum:
    """Region given by a membership test, sampled through its own proposal."""

    name: str
    contains: Callable[[np.ndarray], np.ndarray]
    proposal: BubbleProposal


def far_shell(N: int, R: float, p: float | None = None) -> Stratum:
    """|x| > R with a heavy-tailed origin-centered proposal."""
    p = N / 2 + 0.5 if p is None else p
    return Stratum(f"far(|x|>{R:g})", lambda x: np.sum(x * x, axis=-1) > R * R,
                   BubbleProposal(tuple(np.zeros(N)), 1.0 / R, p))


def sector_strata(config, R: float, p: float | None = None, far_p: float | None = None) -> list:
    """Omega_j intersected with |x| <= R for every j, plus the far shell."""
    from .geometry import sector_index
    N = config.N
    p = N - config.params.mu / 2 if p is None else p
    out = []
    for j in range(1, config.k + 1):
        def inside(x, j=j):
            return (sector_index(config, x) == j) & (np.sum(x * x, axis=-1) <= R * R)
        out.append(Stratum(f"sector{j}", inside,
                           BubbleProposal(tuple(config.centers[j - 1]), config.lam, p)))
    out.append(far_shell(N, R, far_p))
    return out


def _wants_rng(f) -> bool:
    import inspect
    try:
        sig = inspect.signature(f)
    except (TypeError, ValueError):
        return False
    params = [q for q in sig.parameters.values()
              if q.kind in (q.POSITIONAL_ONLY, q.POSITIONAL_OR_KEYWORD)]
    return len(params) >= 2


def monte_carlo_stratified(f: Callable, strata: Sequence[Stratum], samples_per_stratum: int,
                           seed: int, chunk: int = 50_000) -> QuadratureResult:
    """Unbiased estimate of int f over the union of disjoint strata.

    Each stratum draws from its own proposal and keeps the points it contains;
    the reported error is the combined standard error.  ``f`` gets an (n, N) array
    and, if it accepts a second argument, a Generator for nested randomization.
    """
    import warnings

    if samples_per_stratum < 2:
        raise ValueError("need at least two samples per stratum")
    children = np.random.SeedSequence(seed).spawn(len(strata))
    nested = _wants_rng(f)
    total, var, evals = 0.0, 0.0, 0
    info = {}
    for st, ss in zip(strata, children):
        rng = np.random.default_rng(ss)
        inner_rng = np.random.default_rng(ss.spawn(1)[0]) if nested else None
        s1 = s2 = 0.0
        wmax = 0.0
        hits = 0
        done = 0
        while done < samples_per_stratum:
            n = min(chunk, samples_per_stratum - done)
            x = st.proposal.sample(rng, n)
            mask = np.asarray(st.contains(x), dtype=bool)
            w = np.zeros(n)
            if np.any(mask):
                xs = x[mask]
                fx = np.asarray(f(xs, inner_rng) if nested else f(xs), dtype=float)
                w[mask] = fx / st.proposal.density(xs)
                evals += int(mask.sum())
            hits += int(mask.sum())
            s1 += float(np.sum(w))
            s2 += float(np.sum(w * w))
            wmax = max(wmax, float(np.max(np.abs(w))))
            done += n
        n = samples_per_stratum
        mean = s1 / n
        v = max(s2 / n - mean * mean, 0.0) / (n - 1)
        total += mean
        var += v
        info[st.name] = {"mean": mean, "stderr": math.sqrt(v), "hits": hits}
        if hits == 0:
            warnings.warn(f"stratum {st.name} was never sampled by its proposal", BiasWarning)
        elif s2 > 0 and wmax * wmax > 0.5 * s2 and n >= 100:
            warnings.warn(f"stratum {st.name}: one weight dominates the sample", BiasWarning)
    return QuadratureResult(total, math.sqrt(var), max(evals, 1), True, info)


@dataclass(frozen=True)
class RieszProposal:
    """Density proportional to |z - x0|^{-mu} (1 + lam^2 |z - x0|^2)^{-beta} on R^N.

    Needs 0 < mu < N and 2 beta + mu > N; the default 2 beta = N - mu + 1 gives a
    tail |z|^{-(N+1)} heavier than any bubble power above the critical one.
    """

    center: tuple
    lam: float
    mu: float
    beta: float | None = None

    def _beta(self, N):
        return (N - self.mu + 1) / 2 if self.beta is None else self.beta

    def _norm(self, N):
        from .constants import log_beta, log_gamma
        a = (N - self.mu) / 2
        b = self._beta(N) - a
        logc = (0.5 * N * math.log(math.pi) - log_gamma(N / 2) + log_beta(a, b)
                + (self.mu - N) * math.log(self.lam))
        return math.exp(-logc)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        N = len(c)
        a = (N - self.mu) / 2
        u = rng.beta(a, self._beta(N) - a, size=n)
        rho = np.sqrt(u / (1.0 - u)) / self.lam
        d = rng.standard_normal((n, N))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return c + rho[:, None] * d

    def density(self, x: np.ndarray) -> np.ndarray:
        c = np.asarray(self.center, dtype=float)
        N = len(c)
        d2 = np.sum((x - c) ** 2, axis=-1)
        with np.errstate(divide="ignore"):
            return self._norm(N) * d2 ** (-self.mu / 2) * (1.0 + self.lam ** 2 * d2) ** (-self._beta(N))


@dataclass(frozen=True)
class MixtureProposal:
    """Finite mixture of proposals with the given weights."""

    components: tuple
    weights: tuple

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        w = np.asarray(self.weights, dtype=float)
        counts = rng.multinomial(n, w / w.sum())
        parts = [comp.sample(rng, int(m)) for comp, m in zip(self.components, counts) if m > 0]
        x = np.concatenate(parts)
        return x[rng.permutation(n)]

    def density(self, x: np.ndarray) -> np.ndarray:
        w = np.asarray(self.weights, dtype=float)
        w = w / w.sum()
        return sum(wi * comp.density(x) for wi, comp in zip(w, self.components))


def whole_space(proposal) -> Stratum:
    """A single stratum covering R^N."""
    return Stratum("all", lambda x: np.ones(len(x), dtype=bool), proposal)
