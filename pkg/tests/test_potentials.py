import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from choquard_bubbles.errors import ParameterError
from choquard_bubbles.potentials import (RadialPotential, constant, gaussian_bump, gaussian_well,
                                         potential_from_csv, potential_from_dict,
                                         potential_from_json)

POTS = [constant(1.5), gaussian_bump(0.2, 1.0, 1.0, 0.3), gaussian_well(1.0, 0.9, 1.2, 0.25)]


@pytest.mark.parametrize("pot", POTS)
def test_derivatives_match_finite_differences(pot):
    h = 1e-5
    for r in (0.3, 0.9, 1.1, 2.0):
        assert pot.dV(r) == pytest.approx((pot.V(r + h) - pot.V(r - h)) / (2 * h), abs=1e-8)
        assert pot.d2V(r) == pytest.approx((pot.dV(r + h) - pot.dV(r - h)) / (2 * h), abs=1e-6)
        assert pot.dP(r) == pytest.approx((pot.P(r + h) - pot.P(r - h)) / (2 * h), abs=1e-8)
        assert pot.d2P(r) == pytest.approx((pot.dP(r + h) - pot.dP(r - h)) / (2 * h), abs=1e-6)


def test_values_and_sup():
    p = gaussian_bump(0.5, 2.0, 1.0, 0.5)
    assert p.V(1.0) == pytest.approx(2.5)
    assert p.sup() == 2.5
    w = gaussian_well(1.0, 0.5, 1.0, 0.5)
    assert w.V(1.0) == pytest.approx(0.5)
    assert w.sup() == 1.0
    assert constant(2.0).P(3.0) == pytest.approx(18.0)
    assert np.asarray(p.V(np.array([1.0, 2.0]))).shape == (2,)


@pytest.mark.parametrize("kw", [dict(family="nope"), dict(family="constant", a=-1.0),
                                dict(family="gaussian_bump", a=0.0, b=1.0, w=0.0),
                                dict(family="gaussian_well", a=0.5, b=1.0)])
def test_validation(kw):
    with pytest.raises(ParameterError):
        RadialPotential(**kw)


def test_profile_extremum_bump():
    # P = r^2 b exp(-((r - r0)/w)^2) with a = 0 peaks where r (r - r0) = w^2
    p = gaussian_bump(0.0, 1.0, 1.0, 0.2)
    r_exact = (1.0 + math.sqrt(1.0 + 4 * 0.04)) / 2
    assert p.profile_extremum("max", 0.5, 1.5) == pytest.approx(r_exact, abs=1e-9)
    # constant V has P = a r^2, monotone: no interior extremum
    assert constant(1.0).profile_extremum("max", 0.5, 1.5) is None
    assert constant(1.0).profile_extremum("min", 0.5, 1.5) is None


def test_json_roundtrip():
    for p in POTS:
        assert potential_from_json(p.to_json()) == p
    with pytest.raises(ParameterError):
        potential_from_dict({"family": "constant", "a": 1, "zz": 2})
    with pytest.raises(ParameterError):
        potential_from_json("{bad")


def test_tabulated_csv(tmp_path):
    path = tmp_path / "v.csv"
    rs = np.linspace(0.5, 2.0, 31)
    with open(path, "w") as fh:
        fh.write("r,V\n")
        for r in rs:
            fh.write(f"{float(r)!r},{1 + math.exp(-(r - 1) ** 2)!r}\n")
    p = potential_from_csv(str(path))
    assert p.V(1.0) == pytest.approx(2.0, rel=1e-12)
    assert p.V(1.23) == pytest.approx(1 + math.exp(-0.23 ** 2), rel=1e-3)
    # constant continuation outside the table
    assert p.V(5.0) == pytest.approx(p.V(2.0))
    assert p.dV(5.0) == 0.0
    assert potential_from_dict({"family": "tabulated", "csv": str(path)}).V(1.0) == p.V(1.0)


def test_tabulated_rejects_unsorted():
    with pytest.raises(ParameterError):
        RadialPotential("tabulated", table=((1.0, 1.0), (0.5, 1.0)))


@given(st.floats(0.0, 3.0), st.floats(0.0, 2.0), st.floats(0.3, 2.0), st.floats(0.05, 1.0),
       st.floats(0.0, 4.0))
def test_potentials_nonnegative_and_bounded(a, b, r0, w, r):
    for p in (gaussian_bump(a, b, r0, w), gaussian_well(a + b, b, r0, w)):
        v = p.V(r)
        assert -1e-12 <= v <= p.sup() + 1e-12
