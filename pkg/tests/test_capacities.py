import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selectorkit.capacities import (Ball, Cylinder, Ellipsoid, QUANTITIES, certify_shear, displacement_upper,
                                    epsilon_inequality_check, gromov_lower, hz_lower_radial, parse_body,
                                    shear_displacer, spectral_capacity, verify_chain)
from selectorkit.exceptions import CertificationError, InputError
from selectorkit.hamiltonians import RadialHamiltonian
from selectorkit.profiles import ProfileFunction


def test_gromov_lower_examples():
    assert gromov_lower(Ball(1.5, 4)).lower == pytest.approx(np.pi * 2.25)
    assert gromov_lower(Ellipsoid([1.0, 2.0])).lower == pytest.approx(1.0)
    assert gromov_lower(Cylinder(1.0, 4)).lower == pytest.approx(np.pi)


def test_hz_lower_examples():
    assert hz_lower_radial(Ball(1, 2), 0.05).lower == pytest.approx(np.pi - 0.05)
    assert hz_lower_radial(Ellipsoid([1.0, 2.0]), 0.05).lower == pytest.approx(1 - 0.05)


def test_hz_lower_monotone_in_delta():
    vals = [hz_lower_radial(Ball(1, 2), d).lower for d in (0.2, 0.1, 0.05, 0.01)]
    assert np.all(np.diff(vals) > 0)


@pytest.mark.parametrize("dim", [2, 4])
def test_displacement_upper_ball(dim):
    est = displacement_upper(Ball(1, dim), 0.02)
    assert np.pi <= est.upper <= np.pi + 0.02


def test_too_small_displacer_fails_certification():
    K = shear_displacer(0.9, 0.02)
    with pytest.raises(CertificationError):
        certify_shear(K, 1.0)


def test_spectral_capacity_ball():
    est = spectral_capacity(Ball(1, 2), delta=0.02, e_estimate=displacement_upper(Ball(1, 2), 0.02))
    assert est.upper - est.lower <= 2 * 0.02
    assert est.lower <= np.pi <= est.upper


def test_spectral_capacity_cylinder():
    c = Cylinder(1.0, 4)
    est = spectral_capacity(c, delta=0.02, e_estimate=displacement_upper(c, 0.02))
    assert abs(est.lower - np.pi) <= 0.05 and abs(est.upper - np.pi) <= 0.05


def test_spectral_capacity_tiny_body():
    assert spectral_capacity(Ball(0.05, 2), delta=0.02).lower == 0.0


def test_chain_on_ball():
    rep = verify_chain(Ball(1, 2), delta=0.02)
    assert rep.ok
    for q in QUANTITIES:
        e = rep.estimates[q]
        window = 0.05 if q == "c_sigma_hat" else 0.02
        assert np.pi - 0.02 <= e.lower and e.upper <= np.pi + window
    assert all(c[4] >= -1e-9 for c in rep.comparisons)


def test_chain_on_ellipsoid():
    rep = verify_chain(Ellipsoid([1.0, 2.0]), delta=0.02)
    assert rep.ok
    assert rep.estimates["c_G"].lower == pytest.approx(1.0)
    assert rep.estimates["c_G"].lower <= rep.estimates["e"].upper


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_bounds_scale_quadratically(lam):
    base = verify_chain(Ball(1, 2), delta=0.02)
    big = verify_chain(Ball(lam, 2), delta=0.02 * lam ** 2)
    for q in ("c_G", "e"):
        b, s = base.estimates[q], big.estimates[q]
        assert s.lower == pytest.approx(lam ** 2 * b.lower, rel=1e-9)
        if np.isfinite(b.upper):
            assert s.upper == pytest.approx(lam ** 2 * b.upper, rel=1e-6)


def test_epsilon_inequality_pattern():
    prof = ProfileFunction.shelf(1.0, 0.3, 0.05, 1.4, 1.6, 3.0)
    H = RadialHamiltonian(prof, 2)
    rep = epsilon_inequality_check(Ball(1, 2), 0.3, 0.02, H=H)
    assert rep["ok"]
    assert rep["max_K"] == pytest.approx(0.7 - 0.02, abs=1e-12)


def test_epsilon_near_one_degenerates():
    prof = ProfileFunction.shelf(1.0, 0.95, 0.05, 0.3, 0.8, 3.0)
    rep = epsilon_inequality_check(Ball(1, 2), 0.95, 0.01, H=RadialHamiltonian(prof, 2))
    assert rep["ok"] and rep["max_K"] == pytest.approx(0.04, abs=1e-12)


def test_epsilon_shelf_at_boundary():
    rep = epsilon_inequality_check(Ball(1, 2), 0.3, 0.02)
    assert rep["ok"]


def test_parse_body_errors():
    assert parse_body("ball:r=2,dim=4").dim == 4
    with pytest.raises(InputError):
        parse_body("torus:r=1")
    with pytest.raises(InputError):
        parse_body("ellipsoid:r=1")


@settings(max_examples=8)
@given(st.floats(0.3, 2.0))
def test_ball_chain_brackets_area(r):
    area = np.pi * r * r
    delta = 0.02 * area / np.pi
    lo = hz_lower_radial(Ball(r, 2), delta).lower
    hi = displacement_upper(Ball(r, 2), delta).upper
    assert lo <= area <= hi
    assert hi - lo <= 2 * delta
