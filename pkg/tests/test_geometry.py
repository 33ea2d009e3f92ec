import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate
from scipy.stats import norm

from sfwm.errors import DomainError, InfeasibleGeometryError
from sfwm.geometry import (
    BeamGeometry,
    antistokes_mean_transmission,
    effective_atom_fraction,
    optimal_angle,
    overlap_length,
    phase_mismatch_length,
)
from sfwm.vapor import VaporState

D_13_6 = 0.011021781544117646
D_6_8 = 0.022043563088235293
L_1_6 = 0.016116532573718582
L_2_3 = 0.01121305507684228
THETA_OPT_DEG = 2.3445725245107627
GAUSS_TAIL_AT_MINUS_L = 0.009265838875599534
# scipy.integrate.quad over the truncated Gaussian weight, L at 1.6 deg, OD 3.4 over 75 mm
T_BAR_7MM = 0.6915164089919724
T_BAR_0 = 0.8004120736451743


def test_phase_mismatch_length():
    assert phase_mismatch_length(13.6e9) == pytest.approx(D_13_6, rel=1e-12)
    assert phase_mismatch_length(6.8e9) == pytest.approx(D_6_8, rel=1e-12)
    assert phase_mismatch_length(27.2e9) == pytest.approx(D_13_6 / 2, rel=1e-12)
    for bad in (0.0, -1e9):
        with pytest.raises(DomainError):
            phase_mismatch_length(bad)


def test_overlap_length():
    assert overlap_length(math.radians(1.6), 0.35e-3, 0.1e-3) == pytest.approx(L_1_6, rel=1e-12)
    assert overlap_length(math.radians(2.3), 0.35e-3, 0.1e-3) == pytest.approx(L_2_3, rel=1e-12)
    assert overlap_length(math.pi / 2 - 1e-12, 0.35e-3, 0.1e-3) == pytest.approx(0.45e-3)
    for bad in (0.0, -0.1, math.pi / 2 + 0.01):
        with pytest.raises(DomainError):
            overlap_length(bad, 0.35e-3, 0.1e-3)


@given(st.floats(1e-3, 1.5))
def test_overlap_times_sine_constant(theta):
    assert overlap_length(theta, 0.35e-3, 0.1e-3) * math.sin(theta) == pytest.approx(0.45e-3, rel=1e-12)


def test_optimal_angle():
    th = optimal_angle(0.35e-3, 0.1e-3, 11e-3)
    assert math.degrees(th) == pytest.approx(THETA_OPT_DEG, rel=1e-12)
    with pytest.raises(InfeasibleGeometryError):
        optimal_angle(6e-3, 6e-3, 11e-3)


@given(st.floats(1e-5, 1e-3), st.floats(1e-5, 1e-3), st.floats(3e-3, 0.1))
def test_optimal_angle_round_trip(a, b, d):
    th = optimal_angle(a, b, d)
    assert overlap_length(th, a, b) == pytest.approx(d, rel=1e-9)


def test_beam_geometry_validity():
    g = BeamGeometry(math.radians(1.6), 0.35e-3, 0.1e-3)
    assert g.interaction_length == pytest.approx(L_1_6)
    assert not g.is_valid()
    assert BeamGeometry(math.radians(2.4), 0.35e-3, 0.1e-3).is_valid()
    with pytest.raises(DomainError):
        BeamGeometry(math.radians(1.6), -0.35e-3, 0.1e-3)


def test_atom_fraction_examples():
    L = 0.016
    assert effective_atom_fraction(0.0, L) == pytest.approx(0.5, abs=1e-15)
    assert effective_atom_fraction(10 * L, L) == 1.0
    assert effective_atom_fraction(-L, L) < 0.01
    # truncation at -L puts the edge below the untruncated Gaussian tail
    tail = norm.cdf(-L / (L / (2 * math.sqrt(2 * math.log(2)))))
    assert tail == pytest.approx(GAUSS_TAIL_AT_MINUS_L, rel=1e-12)
    assert effective_atom_fraction(-L, L) <= tail


@given(st.floats(-0.05, 0.05), st.floats(-0.05, 0.05), st.floats(1e-3, 0.05))
def test_atom_fraction_monotone_bounded(z1, z2, L):
    lo, hi = sorted((z1, z2))
    f_lo, f_hi = effective_atom_fraction(lo, L), effective_atom_fraction(hi, L)
    assert 0.0 <= f_lo <= f_hi <= 1.0


def _quad_oracle(z, L, od_per_m, cell=0.075):
    sigma = L / (2 * math.sqrt(2 * math.log(2)))
    lo, hi = max(-L, z - cell), min(L, z)
    if hi <= lo:
        return 1.0
    w = lambda s: math.exp(-0.5 * (s / sigma) ** 2)
    num = integrate.quad(lambda s: w(s) * math.exp(-od_per_m * (z - s)), lo, hi, epsabs=0, epsrel=1e-12)[0]
    den = integrate.quad(w, lo, hi, epsabs=0, epsrel=1e-12)[0]
    return num / den


def test_transmission_matches_quadrature():
    v = VaporState.at(315.15)
    assert _quad_oracle(7e-3, L_1_6, 3.4 / 0.075) == pytest.approx(T_BAR_7MM, rel=1e-9)
    assert _quad_oracle(0.0, L_1_6, 3.4 / 0.075) == pytest.approx(T_BAR_0, rel=1e-9)
    t7 = antistokes_mean_transmission(7e-3, L_1_6, v)
    t0 = antistokes_mean_transmission(0.0, L_1_6, v)
    assert t7 == pytest.approx(T_BAR_7MM, rel=1e-8)
    assert t0 == pytest.approx(T_BAR_0, rel=1e-8)
    assert t7 < t0


def test_transmission_limits():
    clear = VaporState.at(315.15, od_resonant=0.0)
    for z in (-0.02, 0.0, 0.007, 0.05):
        assert antistokes_mean_transmission(z, 0.016, clear) == pytest.approx(1.0, abs=1e-12)
    v = VaporState.at(315.15)
    assert antistokes_mean_transmission(-0.016, 0.016, v) == 1.0


@given(st.floats(-0.02, 0.1), st.floats(-0.02, 0.1), st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_transmission_monotone(z1, z2, od1, od2):
    L = 0.016
    lo, hi = sorted((z1, z2))
    v = VaporState.at(315.15, od_resonant=od1)
    assert antistokes_mean_transmission(hi, L, v) <= antistokes_mean_transmission(lo, L, v) + 1e-12
    a, b = sorted((od1, od2))
    va, vb = VaporState.at(315.15, od_resonant=a), VaporState.at(315.15, od_resonant=b)
    assert antistokes_mean_transmission(z1, L, vb) <= antistokes_mean_transmission(z1, L, va) + 1e-12
    t = antistokes_mean_transmission(z1, L, v)
    assert 0.0 <= t <= 1.0


def test_transmission_vectorised_grid_consistency():
    v = VaporState.at(315.15)
    zs = np.linspace(-0.01, 0.03, 9)
    vals = [antistokes_mean_transmission(z, 0.016, v) for z in zs]
    assert np.all(np.diff(vals) <= 1e-12)
