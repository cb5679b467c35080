import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selectorkit.capacities import Ellipsoid, displacement_upper
from selectorkit.contact import (alpha_one, closed_characteristics, conformality_check, ellipsoid_surface,
                                 parse_surface, plateau_hamiltonian, reeb_field, round_sphere,
                                 spectrum_positivity_check, thicken, verify_reeb_bound)
from selectorkit.exceptions import InputError
from selectorkit.flows import flow_map, omega0


@pytest.fixture(scope="module")
def e12():
    return ellipsoid_surface([1.0, 2.0])


def test_reeb_identities_on_sphere():
    S = round_sphere(1.0)
    P = S.points(200, seed=3)
    R = reeb_field(S, P)
    assert np.max(np.abs(S.contact_form(P, R) - 1)) < 1e-9
    rng = np.random.default_rng(0)
    for x, r in zip(P[:40], R[:40]):
        B = S.tangent_basis(x)
        v = rng.standard_normal(B.shape[0]) @ B
        assert abs(omega0(r, v)) < 1e-9


def test_sphere_reeb_is_hopf_flow():
    # on the sphere of radius 1 the Reeb flow is z -> exp(2 i t / 1) z: period pi
    S = round_sphere(1.0)
    x = S.points(1, seed=0, include_axes=False)
    R = reeb_field(S, x)
    n = 2
    hopf = 2 * np.concatenate([-x[:, n:], x[:, :n]], axis=1)
    assert np.allclose(R, hopf, atol=1e-12)


def test_points_off_surface_rejected():
    with pytest.raises(InputError):
        reeb_field(round_sphere(1.0), np.array([2.0, 0, 0, 0]))


def test_ellipsoid_axis_circles(e12):
    orbits = closed_characteristics(e12, 2.5, n_seeds=8)
    acts = sorted({round(o.action, 8) for o in orbits})
    assert acts[0] == pytest.approx(1.0, abs=1e-8)
    assert 2.0 in acts
    assert all(o.action > 0 for o in orbits)


def test_sphere_orbits_share_one_action():
    S = round_sphere(1.0)
    orbits = closed_characteristics(S, 4.0, n_seeds=8)
    assert orbits and all(abs(o.action - np.pi) < 1e-8 for o in orbits)


def test_alpha_one_ellipsoid(e12):
    a = alpha_one(e12, 2.5, n_seeds=8)
    assert a.value == pytest.approx(1.0, abs=1e-6)
    e = displacement_upper(Ellipsoid([1.0, 2.0]), 0.02).upper
    assert a.value <= e


@pytest.mark.parametrize("c", [0.5, 3.0])
def test_alpha_one_scales_with_gauge(c):
    S = ellipsoid_surface([1.0, 1.0])
    assert alpha_one(S.scaled(c), 2.0 * c, n_seeds=6).value == pytest.approx(c, abs=1e-8)


def test_thicken(e12):
    S0, _ = thicken(e12, 0.0)
    assert np.allclose(S0.gauge.a, e12.gauge.a)
    S, collar = thicken(e12, 0.21)
    assert np.allclose(S.gauge.a, [1.21, 2.42])
    x = e12.points(5, seed=1)
    assert np.allclose(S.gauge.value(collar(x)), 1.0)


def test_conformality(e12):
    rep = conformality_check(e12, (0.0, 0.1, 0.2), T_max=1.5, n_seeds=8)
    assert rep["ok"]
    assert [r[1] for r in rep["rows"]] == pytest.approx([1.0, 1.1, 1.2], abs=1e-8)


def test_conformality_sphere_slope():
    S = round_sphere(1.0)
    rep = conformality_check(S, (0.0, 0.1, 0.2), T_max=4.0, n_seeds=6)
    assert rep["slope"] == pytest.approx(np.pi, abs=1e-8)


def test_plateau_hamiltonian_values():
    S = round_sphere(1.0)
    H = plateau_hamiltonian(S, 0.2, 5.0)
    core = S.points(10, seed=2)
    assert np.allclose(H.value(0, core), 5.0)
    assert np.allclose(H.value(0, 1.2 * core), 0.0)
    assert np.allclose(H.value(0, 0.8 * core), 0.0)


def test_plateau_orbits_live_on_shells():
    S = round_sphere(1.0)
    H = plateau_hamiltonian(S, 0.2, 5.0)
    # the level with f'(eps) at the first Reeb multiple carries closed orbits
    from selectorkit.spectrum import radial_spectrum_oracle

    spec = radial_spectrum_oracle(H.profile)
    orbit = [e for e in spec if e.kind == "orbit"][0]
    x = np.array([[np.sqrt(orbit.level / np.pi), 0, 0, 0]])
    assert np.allclose(flow_map(H, x), x, atol=1e-9)


def test_reeb_bound_sphere():
    rep = verify_reeb_bound(round_sphere(1.0))
    assert rep["status"] == "pass"
    assert rep["alpha_1"] == pytest.approx(np.pi, abs=1e-8)
    assert rep["alpha_1"] <= rep["c_sigma_hat_upper"] <= rep["e_upper"] <= np.pi + 0.05
    assert 0 < rep["f_eps"] < rep["C"]
    assert rep["alpha_1"] <= rep["diameter_bound"]


def test_reeb_bound_ellipsoid_shell():
    S = ellipsoid_surface([1.0, 2.0])
    a = alpha_one(S, 2.5, n_seeds=8).value
    e_shell = displacement_upper(Ellipsoid([1.0, 2.0]).scaled(1.01), 0.02).upper
    assert a == pytest.approx(1.0) and a <= e_shell


def test_positivity_sqrt2():
    S = ellipsoid_surface([1.0, np.sqrt(2)])
    rep = spectrum_positivity_check(S, 3.0, n_seeds=8)
    assert rep["ok"] and rep["min_action"] == pytest.approx(1.0, abs=1e-8)
    for v in rep["clusters"]:
        assert min(abs(v - k) for k in (1, 2, 3, np.sqrt(2), 2 * np.sqrt(2))) < 1e-6


def test_parse_surface():
    assert parse_surface("sphere:r=2,dim=4").gauge.a == pytest.approx([4 * np.pi] * 2)
    with pytest.raises(InputError):
        parse_surface("torus:r=1")


@settings(max_examples=5)
@given(st.floats(0.5, 3.0), st.floats(1.05, 2.0))
def test_alpha_one_is_smallest_axis(a1, ratio):
    S = ellipsoid_surface([a1, a1 * ratio])
    assert alpha_one(S, 1.2 * a1, n_seeds=6).value == pytest.approx(a1, rel=1e-7)
