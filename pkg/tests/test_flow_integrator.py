import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from selectorkit.capacities import shear_displacer
from selectorkit.exceptions import InputError
from selectorkit.flows import (covering_radius, displacement_check, flow_map, integrate, monodromy, omega0,
                               standard_j, time_one_map)
from selectorkit.hamiltonians import QuadraticHamiltonian, TranslatedHamiltonian, ZeroHamiltonian, inverse

from .conftest import bump


def test_zero_flow_is_constant():
    tr = integrate(ZeroHamiltonian(2), np.array([0.3, 0.4]))
    assert np.all(tr.x == tr.x[0])


def test_harmonic_returns_after_one_period():
    H = QuadraticHamiltonian.harmonic(2)
    tr = integrate(H, np.array([1.0, 0.0]))
    assert np.allclose(tr.x[-1], [1.0, 0.0], atol=1e-9)
    # counterclockwise: a quarter period later the point sits on the p axis
    assert np.allclose(tr.x[50], [0.0, 1.0], atol=1e-9)


def test_half_slope_level_is_antipodal():
    H = bump(0.5 * 0.54, 0.2, 0.8)  # slope exactly -1/2 on the linear ramp
    s = 0.5
    x0 = np.array([[np.sqrt(s / np.pi), 0.0]])
    assert H.profile.d1(np.array([s]))[0] == pytest.approx(-0.5)
    for closed in (True, False):
        assert np.allclose(flow_map(H, x0, closed_form=closed), -x0, atol=1e-9)


def test_points_outside_support_are_fixed(small_bump):
    x = np.array([1.0, 1.0])
    assert np.array_equal(time_one_map(small_bump, x), x)


def test_inverse_flow_undoes_flow():
    K = TranslatedHamiltonian(bump(0.9, 0.1, 0.6), [0.25, -0.1])
    X = np.array([[0.1, 0.2], [0.3, -0.3], [0.0, 0.05]])
    assert np.max(np.abs(flow_map(inverse(K), flow_map(K, X)) - X)) < 1e-8


def test_closed_form_agrees_with_integration(steep_bump, rng):
    X = rng.uniform(-0.45, 0.45, (16, 2))
    Y1, M1 = flow_map(steep_bump, X, jac=True)
    Y2, M2 = flow_map(steep_bump, X, jac=True, closed_form=False)
    assert np.max(np.abs(Y1 - Y2)) < 1e-8
    assert np.max(np.abs(M1 - M2)) < 1e-6


def test_monodromy_of_zero_is_identity():
    M = monodromy(ZeroHamiltonian(2), np.array([0.1, 0.1]))
    assert np.allclose(M.matrix, np.eye(2))
    assert M.det_id_minus == 0.0 and not M.nondegenerate


def test_monodromy_radial_orbit():
    # planar orbit at a level with h'' != 0: the twist makes the flow
    # direction the only eigenvalue-1 direction
    H = bump(2.0, 0.2, 0.8, corner=0.3)
    s, h2 = H.profile.derivative_roots(-1.0)[0][0]
    assert abs(h2) > 1e-3
    x0 = np.array([np.sqrt(s / np.pi), 0.0])
    M = monodromy(H, x0)
    assert M.symplectic_residual < 1e-7
    assert M.transversally_nondegenerate


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_monodromy_is_symplectic(a, b, c, d):
    H = TranslatedHamiltonian(bump(1.5, 0.2, 0.8, dim=4), [0.1, 0.0, -0.1, 0.05])
    M = monodromy(H, np.array([a, b, c, d]))
    assert M.symplectic_residual < 1e-7


def test_omega0_and_j():
    J = standard_j(4)
    assert np.allclose(J @ J, -np.eye(4))
    u, v = np.array([1.0, 0, 0, 0]), np.array([0, 0, 1.0, 0])
    assert omega0(u, v) == pytest.approx(1.0)


def test_zero_displaces_nothing(rng):
    cloud = rng.uniform(-1, 1, (4000, 2))
    ok, info = displacement_check(ZeroHamiltonian(2), cloud, margin=0.4)
    assert not ok and info["min_distance"] == 0.0


def test_shear_displaces_disc_and_subsets():
    K = shear_displacer(1.0, 1.0)
    g = np.arange(-1, 1.0001, 0.02)
    grid = np.array(np.meshgrid(g, g)).reshape(2, -1).T
    disc = grid[np.linalg.norm(grid, axis=1) <= 1]
    ok, info = displacement_check(K, disc, margin=0.1)
    assert ok
    sub = disc[np.linalg.norm(disc, axis=1) < 0.5]
    ok2, _ = displacement_check(K, sub, margin=0.1)
    assert ok2


def test_sparse_cloud_rejected(rng):
    with pytest.raises(InputError):
        displacement_check(ZeroHamiltonian(2), rng.uniform(-1, 1, (20, 2)), margin=0.01)


def test_covering_radius_shrinks_with_density(rng):
    a = covering_radius(rng.uniform(-1, 1, (200, 2)))
    b = covering_radius(rng.uniform(-1, 1, (5000, 2)))
    assert b < a
