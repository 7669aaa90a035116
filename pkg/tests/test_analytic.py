import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chirplock import analytic
from chirplock.params import PhysicalParams


def test_single_step_closed_forms():
    # N = 1: P = 1 - exp(-pi P1^2 / 2)
    x = math.sqrt(2 * math.log(2) / math.pi)
    assert analytic.lc_threshold(1) == pytest.approx(x, abs=1e-12)
    # dP/dP1 = pi P1 exp(-pi P1^2/2) = pi x / 2 at threshold
    assert analytic.lc_width(1) == pytest.approx(2.0 / (math.pi * x), rel=1e-10)


def test_step_probability():
    assert analytic.lz_step_probability(0.0, 3) == 0.0
    assert analytic.lz_step_probability(1.0, 2) == pytest.approx(1 - math.exp(-math.pi))
    arr = analytic.lz_step_probability(np.array([0.1, 1e-9]), 1)
    # no cancellation for tiny P1
    assert arr[1] == pytest.approx(0.5 * math.pi * 1e-18, rel=1e-6)
    with pytest.raises(ValueError):
        analytic.lz_step_probability(1.0, 0)


def test_product_matches_direct_product():
    P1 = 0.7
    r = math.exp(-0.5 * math.pi * P1**2)
    direct = np.prod([1 - r**k for k in range(1, 6)])
    assert analytic.lc_capture_probability(P1, 5) == pytest.approx(direct, rel=1e-14)


@given(P1=st.floats(0.05, 3.0), N=st.integers(1, 8))
@settings(max_examples=80)
def test_slope_matches_finite_difference(P1, N):
    h = 1e-6
    fd = (analytic.lc_capture_probability(P1 + h, N) - analytic.lc_capture_probability(P1 - h, N)) / (2 * h)
    assert analytic.lc_capture_slope(P1, N) == pytest.approx(fd, rel=1e-6, abs=1e-10)


@given(a=st.floats(0.0, 4.0), b=st.floats(0.0, 4.0), N=st.integers(1, 10))
def test_capture_probability_is_monotone_and_bounded(a, b, N):
    lo, hi = sorted((a, b))
    pa = analytic.lc_capture_probability(lo, N)
    pb = analytic.lc_capture_probability(hi, N)
    assert 0.0 <= pa <= pb <= 1.0


@given(N=st.integers(1, 12))
def test_longer_products_need_stronger_drive(N):
    assert analytic.lc_threshold(N + 1) > analytic.lc_threshold(N)


def test_threshold_saturates_with_product_length():
    # later factors approach 1 quickly, so the threshold converges
    assert analytic.lc_threshold(40) - analytic.lc_threshold(20) < 1e-6


def test_classical_threshold_formula():
    assert analytic.classical_threshold(1.0) == pytest.approx(0.82)
    assert analytic.classical_threshold(np.array([0.25, 4.0])) == pytest.approx([1.64, 0.41])
    with pytest.raises(ValueError):
        analytic.classical_threshold(0.0)


def test_threshold_coefficient_is_exact_prefactor():
    assert analytic.classical_threshold_coefficient() == pytest.approx(1.34 * math.sqrt(3 / 8), rel=1e-12)


pos = st.floats(min_value=0.05, max_value=20.0)


@given(m=pos, w=pos, beta=pos, alpha=st.floats(1e-5, 1e-1), hbar=pos)
@settings(max_examples=50)
def test_threshold_coefficient_does_not_depend_on_units(m, w, beta, alpha, hbar):
    p = PhysicalParams(m=m, omega0=w, beta=beta, eps=0.0, alpha=alpha, hbar=hbar)
    assert analytic.classical_threshold_coefficient(physical=p) == pytest.approx(0.82059, abs=1e-4)


def test_classical_width_limits():
    assert analytic.classical_width() == pytest.approx(0.615)
    # high temperature: 1.23 sqrt(kT / 2 hbar w0)
    assert analytic.classical_width(kT=400.0) == pytest.approx(1.23 * math.sqrt(200.0), rel=1e-4)
    w = analytic.classical_width(kT=np.array([0.0, 0.5, 1.0]))
    assert np.all(np.diff(w) > 0)


def test_regime_label():
    assert analytic.regime(0.8, 8.0) == "LC"
    assert analytic.regime(1.9, 0.2) == "AR"


def test_lz_params():
    assert analytic.LZParams(1.0).r == pytest.approx(math.exp(-math.pi / 2))
    with pytest.raises(ValueError):
        analytic.LZParams(-1.0)
    with pytest.raises(ValueError):
        analytic.LZParams(1.0, 0)
