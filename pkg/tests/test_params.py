import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chirplock.params import (DimensionlessParams, PhysicalParams, coth_half_inverse,
                              effective_temperature, fixed_frame_units, from_fixed_frame_units,
                              from_physical)

pos = st.floats(min_value=1e-2, max_value=1e2, allow_nan=False)
scale = st.floats(min_value=0.1, max_value=10.0)


def test_coth_limits():
    assert coth_half_inverse(0.0) == 1.0
    assert coth_half_inverse(1e-4) == 1.0
    # coth(1/2t) ~ 2t for large t
    assert coth_half_inverse(1e4) == pytest.approx(2e4, rel=1e-8)
    assert coth_half_inverse(1.0) == pytest.approx(1.0 / math.tanh(0.5), rel=1e-14)
    with pytest.raises(ValueError):
        coth_half_inverse(-1.0)


@given(st.floats(min_value=1e-3, max_value=1e3))
def test_coth_matches_direct(theta):
    assert coth_half_inverse(theta) == pytest.approx(1.0 / math.tanh(0.5 / theta), rel=1e-12)


def test_derived_quantities():
    d = DimensionlessParams(0.8, 8.0)
    assert d.mu == pytest.approx(0.4 * math.sqrt(8.0))
    assert d.lam == 4.0
    assert d.gamma == 2.0
    assert d.sigma2 == 2.0
    hot = DimensionlessParams(0.8, 8.0, theta=2.0)
    assert hot.gamma < 2.0 and hot.sigma2 > d.sigma2
    assert hot.gamma * hot.sigma2 == pytest.approx(d.lam)


@pytest.mark.parametrize("P1,P2,theta", [(-0.1, 1, 0), (1, 0, 0), (1, -2, 0), (1, 1, -1), (math.nan, 1, 0)])
def test_invalid_params(P1, P2, theta):
    with pytest.raises(ValueError):
        DimensionlessParams(P1, P2, theta)


def test_physical_validation():
    with pytest.raises(ValueError):
        PhysicalParams(m=0, omega0=1, beta=1, eps=0, alpha=1)
    with pytest.raises(ValueError):
        PhysicalParams(m=1, omega0=1, beta=1, eps=-1, alpha=1)


@given(m=pos, w=pos, beta=pos, eps=pos, alpha=pos, hbar=pos, cm=scale, cl=scale, ct=scale)
def test_p1_p2_invariant_under_unit_changes(m, w, beta, eps, alpha, hbar, cm, cl, ct):
    # new mass unit cm, length unit cl, time unit ct
    p = PhysicalParams(m, w, beta, eps, alpha, hbar)
    q = PhysicalParams(
        m=m / cm,
        omega0=w * ct,
        beta=beta * cl**2,
        eps=eps * ct**2 / (cm * cl),
        alpha=alpha * ct**2,
        hbar=hbar * ct / (cm * cl**2),
    )
    a, b = from_physical(p), from_physical(q)
    assert b.P1 == pytest.approx(a.P1, rel=1e-10)
    assert b.P2 == pytest.approx(a.P2, rel=1e-10)


def test_from_physical_scalings():
    base = PhysicalParams(m=1.0, omega0=1.0, beta=0.1, eps=0.01, alpha=1e-4)
    d = from_physical(base)
    # P1 linear in eps, P2 linear in beta and hbar
    d2 = from_physical(PhysicalParams(1.0, 1.0, 0.2, 0.03, 1e-4))
    assert d2.P1 == pytest.approx(3 * d.P1)
    assert d2.P2 == pytest.approx(2 * d.P2)
    # classical parameter mu is independent of hbar
    d3 = from_physical(PhysicalParams(1.0, 1.0, 0.1, 0.01, 1e-4, hbar=0.01))
    assert d3.mu == pytest.approx(d.mu)


def test_effective_temperature():
    assert effective_temperature(1.0, 0.0) == 0.5
    assert effective_temperature(1.0, 100.0) == pytest.approx(100.0, rel=1e-5)
    arr = effective_temperature(2.0, np.array([0.0, 1.0]), hbar=1.0)
    assert arr.shape == (2,) and arr[0] == 1.0 and arr[1] > 1.0
    with pytest.raises(ValueError):
        effective_temperature(1.0, -1.0)


@pytest.mark.parametrize("P1,P2,alpha_bar,beta_bar,eps_bar", [
    (1.0, 1.0, 1e-4, 0.0067, 0.02),
    (1.9, 0.2, 1e-4, 0.0013, 0.038),
    (0.8, 8.0, 6.25e-7, 0.0042, 0.0013),
])
def test_fixed_frame_units_of_the_figure_runs(P1, P2, alpha_bar, beta_bar, eps_bar):
    b, e = fixed_frame_units(P1, P2, alpha_bar)
    assert b == pytest.approx(beta_bar, rel=0.03)
    assert e == pytest.approx(eps_bar, rel=0.03)


@given(P1=pos, P2=pos, a=st.floats(1e-8, 1e-2), g=st.floats(0.1, 2.0))
@settings(max_examples=50)
def test_fixed_frame_round_trip(P1, P2, a, g):
    b, e = fixed_frame_units(P1, P2, a, g)
    q1, q2 = from_fixed_frame_units(a, b, e, g)
    assert q1 == pytest.approx(P1, rel=1e-12)
    assert q2 == pytest.approx(P2, rel=1e-12)
