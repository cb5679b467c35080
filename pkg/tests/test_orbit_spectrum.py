import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from selectorkit.hamiltonians import RadialHamiltonian, TimeReparametrization, ZeroHamiltonian, radial, reparametrize
from selectorkit.loops import FourierLoop
from selectorkit.profiles import ProfileFunction
from selectorkit.spectrum import (OrbitFinder, PeriodicOrbit, action_of, find_orbits, radial_spectrum_oracle,
                                  spectrum)

from .conftest import bump


def test_zero_spectrum():
    spec = spectrum(ZeroHamiltonian(2))
    assert np.allclose(spec.values, [0.0])
    assert np.allclose(radial_spectrum_oracle(ProfileFunction.zero()).values, [0.0])


def test_admissible_simple_spectrum(small_bump):
    spec = spectrum(small_bump)
    assert np.allclose(spec.values, [0.0, 0.5], atol=1e-9)
    assert all(e.kind == "constant" for e in spec)


def test_winding_minus_one_orbits(steep_bump):
    orbits, _ = find_orbits(steep_bump)
    w1 = [o for o in orbits if o.winding == -1]
    assert w1
    prof = steep_bump.profile
    for o in w1:
        assert prof.d1(np.array([o.level]))[0] == pytest.approx(-1.0, abs=1e-8)
        s = o.level
        assert o.action == pytest.approx(float(prof.value(np.array([s]))[0]) + s, abs=1e-8)


def test_action_of_constant(small_bump):
    x = np.array([0.01, 0.0])
    o = PeriodicOrbit(x0=x, loop=FourierLoop.constant(x, kmax=4), action=0.0, constant=True)
    assert action_of(small_bump, o) == pytest.approx(0.5)
    assert action_of(ZeroHamiltonian(2), o) == 0.0


def test_search_matches_oracle(steep_bump):
    spec = spectrum(steep_bump)
    orc = radial_spectrum_oracle(steep_bump.profile)
    for v in spec.values:
        assert orc.contains(v, 1e-6)
    for e in orc:
        if not e.degenerate:
            assert spec.contains(e.value, 1e-6)


def test_linear_ramp_band_is_flagged():
    prof = ProfileFunction([0.0, 0.1, 0.2, 0.6, 0.7, 1.0], [1.0, 1.0, 0.9, 0.1, 0.0, 0.0],
                           [0.0, 0.0, -2.0, -2.0, 0.0, 0.0])
    orc = radial_spectrum_oracle(prof)
    bands = [e for e in orc if e.interval is not None and e.winding == -2]
    assert bands
    a, b = bands[0].interval
    assert a == pytest.approx(0.2) and b == pytest.approx(0.6)
    # every s in the band has action h(s) + 2 s = 1.3
    assert bands[0].value == pytest.approx(1.3)
    assert bands[0].degenerate


def test_small_slope_gives_critical_values_only():
    orc = radial_spectrum_oracle(ProfileFunction.bump(0.6, 0.2, 0.9))
    assert all(e.kind == "constant" for e in orc)
    assert np.allclose(orc.values, [0.0, 0.6])


def test_reparametrized_spectrum_is_unchanged(steep_bump):
    Hl = reparametrize(steep_bump, TimeReparametrization.power(2))
    a = spectrum(steep_bump).values
    b = spectrum(Hl, n_radial=96).values
    assert len(a) == len(b)
    assert np.max(np.abs(a - b)) < 1e-8


def test_orbit_finder_estimator(small_bump):
    est = OrbitFinder(n_radial=64)
    assert np.allclose(est.transform(small_bump), [0.0, 0.5], atol=1e-9)
    assert est.get_params()["n_radial"] == 64


@given(st.floats(1.2, 4.0), st.floats(0.1, 0.3), st.floats(0.6, 1.0))
def test_search_subset_of_oracle(height, p_end, s_end):
    H = RadialHamiltonian(ProfileFunction.bump(height, p_end, s_end), 2)
    orc = radial_spectrum_oracle(H.profile)
    spec = spectrum(H, n_radial=96)
    for v in spec.values:
        assert orc.contains(v, 1e-6)


def test_four_dimensional_orbits():
    H = radial([0.0, 0.2, 0.8], [2.0, 2.0, 0.0], [0.0, 0.0, 0.0], dim=4)
    orc = radial_spectrum_oracle(H.profile)
    spec = spectrum(H)
    for e in orc:
        if not e.degenerate:
            assert spec.contains(e.value, 1e-6)
