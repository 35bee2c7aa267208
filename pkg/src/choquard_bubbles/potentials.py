"""Radial potentials V(r) and the Pohozaev profile P(r) = r^2 V(r)."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import minimize_scalar

from .errors import ParameterError

FAMILIES = ("constant", "gaussian_bump", "gaussian_well", "tabulated")


@dataclass(frozen=True)
class RadialPotential:
    """A bounded nonnegative radial potential.

    ``gaussian_bump``: V = a + b exp(-((r - r0)/w)^2)
    ``gaussian_well``: V = a - b exp(-((r - r0)/w)^2), needs a >= b
    ``tabulated``: monotone cubic (PCHIP) through (r, V) samples, constant outside
    """

    family: str
    a: float = 0.0
    b: float = 0.0
    r0: float = 1.0
    w: float = 1.0
    table: tuple = ()
    _interp: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown potential family {self.family!r}")
        if self.family == "tabulated":
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[1] != 2 or len(tab) < 2:
                raise ParameterError("tabulated potential needs at least two (r, V) pairs")
            if np.any(np.diff(tab[:, 0]) <= 0):
                raise ParameterError("tabulated r values must be strictly increasing")
            if np.any(tab[:, 1] < 0) or np.any(tab[:, 0] < 0):
                raise ParameterError("tabulated r and V must be nonnegative")
            object.__setattr__(self, "_interp", PchipInterpolator(tab[:, 0], tab[:, 1]))
            return
        if self.a < 0:
            raise ParameterError("base level a must be >= 0")
        if self.family != "constant":
            if self.b < 0 or not self.w > 0 or not self.r0 > 0:
                raise ParameterError("need b >= 0, w > 0, r0 > 0")
            if self.family == "gaussian_well" and self.b > self.a:
                raise ParameterError("gaussian_well needs a >= b so that V >= 0")

    # -- evaluation -------------------------------------------------------
    def _bump(self, r):
        z = (r - self.r0) / self.w
        return np.exp(-z * z), z

    def _sign(self):
        return 1.0 if self.family == "gaussian_bump" else -1.0

    def _tab(self, r, nu):
        r = np.asarray(r, dtype=float)
        lo, hi = self.table[0][0], self.table[-1][0]
        rc = np.clip(r, lo, hi)
        v = self._interp(rc, nu)
        if nu > 0:
            v = np.where((r < lo) | (r > hi), 0.0, v)
        return v

    def V(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "constant":
            out = np.full_like(r, self.a)
        elif self.family == "tabulated":
            out = self._tab(r, 0)
        else:
            e, _ = self._bump(r)
            out = self.a + self._sign() * self.b * e
        return float(out) if out.ndim == 0 else out

    def dV(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "constant":
            out = np.zeros_like(r)
        elif self.family == "tabulated":
            out = self._tab(r, 1)
        else:
            e, z = self._bump(r)
            out = self._sign() * self.b * e * (-2.0 * z / self.w)
        return float(out) if out.ndim == 0 else out

    def d2V(self, r):
        r = np.asarray(r, dtype=float)
        if self.family == "constant":
            out = np.zeros_like(r)
        elif self.family == "tabulated":
            out = self._tab(r, 2)
        else:
            e, z = self._bump(r)
            out = self._sign() * self.b * e * (4.0 * z * z - 2.0) / self.w ** 2
        return float(out) if out.ndim == 0 else out

    def P(self, r):
        return np.asarray(r) ** 2 * self.V(r)

    def dP(self, r):
        r = np.asarray(r, dtype=float)
        return 2.0 * r * self.V(r) + r * r * self.dV(r)

    def d2P(self, r):
        r = np.asarray(r, dtype=float)
        return 2.0 * self.V(r) + 4.0 * r * self.dV(r) + r * r * self.d2V(r)

    def sup(self) -> float:
        """An upper bound for V (exact for the analytic families)."""
        if self.family == "tabulated":
            return float(np.max(np.asarray(self.table)[:, 1]) * 1.25)
        return self.a + (self.b if self.family == "gaussian_bump" else 0.0)

    # -- profile extremum ------------------------------------------------------
    def profile_extremum(self, kind: str, lo: float, hi: float, grid: int = 2001):
        """Interior max or min of P(r) = r^2 V(r) on [lo, hi], or None if on the boundary."""
        rs = np.linspace(lo, hi, grid)
        ps = np.asarray(self.P(rs))
        sgn = -1.0 if kind == "max" else 1.0
        i = int(np.argmin(sgn * ps))
        if i == 0 or i == grid - 1:
            return None
        res = minimize_scalar(lambda t: sgn * float(self.P(t)), bounds=(rs[i - 1], rs[i + 1]),
                              method="bounded", options={"xatol": 1e-13})
        r = float(res.x)
        if not lo < r < hi:
            return None
        return r

    # -- serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        if self.family == "tabulated":
            return {"family": "tabulated", "table": [list(map(float, row)) for row in self.table]}
        if self.family == "constant":
            return {"family": "constant", "a": self.a}
        return {"family": self.family, "a": self.a, "b": self.b, "r0": self.r0, "w": self.w}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def potential_from_dict(d: dict) -> RadialPotential:
    if not isinstance(d, dict) or "family" not in d:
        raise ParameterError("potential spec must be an object with a 'family' field")
    fam = d["family"]
    if fam == "tabulated":
        if "csv" in d:
            return potential_from_csv(d["csv"])
        return RadialPotential("tabulated", table=tuple(tuple(map(float, row)) for row in d["table"]))
    known = {"a", "b", "r0", "w"}
    extra = set(d) - known - {"family"}
    if extra:
        raise ParameterError(f"unknown potential fields {sorted(extra)}")
    try:
        vals = {k: float(d[k]) for k in known if k in d}
    except (TypeError, ValueError):
        raise ParameterError("potential parameters must be numbers") from None
    return RadialPotential(fam, **vals)


def potential_from_json(text: str) -> RadialPotential:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"invalid potential JSON: {exc}") from None
    return potential_from_dict(d)


def potential_from_csv(path: str) -> RadialPotential:
    """Read (r, V) rows; a non-numeric first row is treated as a header."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except (ValueError, IndexError):
                if i == 0 or not rows:
                    continue
                raise ParameterError(f"bad potential CSV row {i + 1}: {row}") from None
    return RadialPotential("tabulated", table=tuple(rows))


def constant(a: float) -> RadialPotential:
    return RadialPotential("constant", a=a)


def gaussian_bump(a: float, b: float, r0: float, w: float) -> RadialPotential:
    return RadialPotential("gaussian_bump", a=a, b=b, r0=r0, w=w)


def gaussian_well(a: float, b: float, r0: float, w: float) -> RadialPotential:
    return RadialPotential("gaussian_well", a=a, b=b, r0=r0, w=w)
