"""Bubbles, the k-polygon configuration, the ansatz and its kernel directions.

Every pointwise routine accepts a single point of shape (N,) or a batch of shape
(n, N) and returns a float or an (n,) array accordingly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .constants import ProblemParams, alpha_coeff
from .errors import ParameterError


def _points(x, N: int):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != N:
        raise ParameterError(f"points must have {N} coordinates, got shape {x.shape}")
    return x


def _out(v, x):
    return float(np.asarray(v).reshape(-1)[0]) if np.ndim(x) == 1 else v


def polygon_centers(N: int, k: int, r: float) -> np.ndarray:
    """xi_j = (r cos(2(j-1)pi/k), r sin(2(j-1)pi/k), 0, ..., 0), j = 1..k."""
    ang = 2.0 * np.pi * np.arange(k) / k
    c = np.zeros((k, N))
    c[:, 0] = r * np.cos(ang)
    c[:, 1] = r * np.sin(ang)
    return c


@dataclass(frozen=True)
class BubbleConfig:
    params: ProblemParams
    k: int
    r: float
    lam: float
    centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError(f"k must be a positive integer, got {self.k}")
        if not self.r > 0:
            raise ParameterError(f"r must be positive, got {self.r}")
        if not self.lam > 0:
            raise ParameterError(f"lambda must be positive, got {self.lam}")
        object.__setattr__(self, "k", int(self.k))
        c = polygon_centers(self.params.N, self.k, float(self.r))
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)

    @property
    def N(self) -> int:
        return self.params.N

    def pair_distance(self, j: int) -> float:
        """|xi_j - xi_1| = 2 r sin((j-1) pi / k), 1-based j."""
        return 2.0 * self.r * math.sin((j - 1) * math.pi / self.k)

    def to_json(self) -> str:
        return json.dumps({"N": self.params.N, "mu": self.params.mu, "k": self.k,
                           "r": self.r, "lambda": self.lam}, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "BubbleConfig":
        try:
            return cls(ProblemParams(int(d["N"]), float(d["mu"])), int(d["k"]),
                       float(d["r"]), float(d["lambda"]))
        except KeyError as exc:
            raise ParameterError(f"missing config field {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "BubbleConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class LambdaWindow:
    """Admissible concentration window [L0 k^e, L1 k^e] with e = (N-2)/(N-4)."""

    N: int
    L0: float
    L1: float

    def __post_init__(self):
        if not (0 < self.L0 < self.L1):
            raise ParameterError("need 0 < L0 < L1")

    @property
    def exponent(self) -> float:
        return (self.N - 2) / (self.N - 4)

    def bounds(self, k: int) -> tuple[float, float]:
        s = k ** self.exponent
        return self.L0 * s, self.L1 * s

    def contains(self, k: int, lam: float) -> bool:
        lo, hi = self.bounds(k)
        return lo <= lam <= hi


@dataclass(frozen=True)
class SectorDomain:
    """Omega_j: points whose planar direction is within pi/k of xi_j'."""

    index: int
    config: BubbleConfig

    def __post_init__(self):
        if not 1 <= self.index <= self.config.k:
            raise ParameterError(f"sector index must lie in 1..{self.config.k}")


def sector_index(config: BubbleConfig, x) -> np.ndarray | int:
    """1-based sector label of each point; ties go to the smallest index, x' = 0 to sector 1."""
    x = _points(x, config.N)
    pts = np.atleast_2d(x)
    k = config.k
    ang = np.arctan2(pts[:, 1], pts[:, 0]) % (2.0 * np.pi)
    # nearest polygon direction; the half-way angle pi/k belongs to the lower index
    width = 2.0 * np.pi / k
    t = ang / width
    j = np.floor(t + 0.5).astype(int)
    frac = t - np.floor(t)
    tie = np.isclose(frac, 0.5, rtol=0.0, atol=1e-13)
    lower = np.floor(t).astype(int) % k
    upper = (lower + 1) % k
    j = np.where(tie, np.minimum(lower, upper), j % k)
    zero = (pts[:, 0] == 0.0) & (pts[:, 1] == 0.0)
    j = np.where(zero, 0, j) + 1
    return int(j[0]) if x.ndim == 1 else j


def sector_contains(domain: SectorDomain, x) -> bool | np.ndarray:
    idx = sector_index(domain.config, x)
    return (idx == domain.index) if isinstance(idx, np.ndarray) else idx == domain.index


def bubble_eval(params: ProblemParams, lam: float, xi, x):
    """U_{lambda,xi}(x) = alpha lambda^{(N-2)/2} (1 + lambda^2 |x - xi|^2)^{-(N-2)/2}."""
    N = params.N
    x = _points(x, N)
    d2 = np.sum((x - np.asarray(xi, dtype=float)) ** 2, axis=-1)
    v = alpha_coeff(params) * lam ** ((N - 2) / 2) * (1.0 + lam * lam * d2) ** (-(N - 2) / 2)
    return _out(v, x)


def bubble_profile(params: ProblemParams, lam: float, dist):
    """Bubble as a function of the distance to its center."""
    N = params.N
    dist = np.asarray(dist, dtype=float)
    return alpha_coeff(params) * lam ** ((N - 2) / 2) * (1.0 + (lam * dist) ** 2) ** (-(N - 2) / 2)


def ansatz_eval(config: BubbleConfig, x, return_parts: bool = False):
    """W_{r,lambda}(x) = sum_j U_{lambda,xi_j}(x); optionally the (k, n) per-bubble values."""
    x = _points(x, config.N)
    pts = np.atleast_2d(x)
    parts = np.array([bubble_eval(config.params, config.lam, c, pts) for c in config.centers])
    total = np.sum(parts, axis=0)
    if x.ndim == 1:
        total, parts = float(total[0]), parts[:, 0]
    return (total, parts) if return_parts else total


def psi_derivatives(config: BubbleConfig, j: int, x):
    """(dU_j/dr, dU_j/dlambda) for the single bubble centered at xi_j(r)."""
    if not 1 <= j <= config.k:
        raise ParameterError(f"bubble index must lie in 1..{config.k}")
    N = config.N
    x = _points(x, N)
    lam = config.lam
    alpha = alpha_coeff(config.params)
    xi = config.centers[j - 1]
    diff = x - xi
    d2 = np.sum(diff * diff, axis=-1)
    q = 1.0 + lam * lam * d2
    # d xi_j / d r is the unit vector xi_j / r
    dxi = xi / config.r
    psi1 = alpha * (N - 2) * lam ** ((N + 2) / 2) * q ** (-N / 2) * (diff @ dxi)
    psi2 = alpha * (N - 2) / 2 * lam ** ((N - 4) / 2) * (1.0 - lam * lam * d2) * q ** (-N / 2)
    return _out(psi1, x), _out(psi2, x)


def ansatz_dr(config: BubbleConfig, x):
    """dW/dr with all k centers moving (chain rule through every xi_j(r))."""
    return sum(psi_derivatives(config, j, x)[0] for j in range(1, config.k + 1))


def kernel_eval(params: ProblemParams, i: int, x):
    """Z_i = dU/dx_i (i <= N) and Z_{N+1} = (N-2)/2 U + x . grad U, for U = U_{1,0}.

    Z_{N+1} equals +dU_{lambda,0}/dlambda at lambda = 1.
    """
    N = params.N
    if not 1 <= i <= N + 1:
        raise ParameterError(f"kernel index must lie in 1..{N + 1}, got {i}")
    x = _points(x, N)
    alpha = alpha_coeff(params)
    d2 = np.sum(x * x, axis=-1)
    q = 1.0 + d2
    if i <= N:
        v = -alpha * (N - 2) * x[..., i - 1] * q ** (-N / 2)
    else:
        v = alpha * (N - 2) / 2 * (1.0 - d2) * q ** (-N / 2)
    return _out(v, x)
