import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from selectorkit.exceptions import InputError
from selectorkit.flows import flow_map
from selectorkit.hamiltonians import (QuadraticHamiltonian, RadialHamiltonian, SeparableHamiltonian,
                                      TimeReparametrization, TranslatedHamiltonian, ZeroHamiltonian, classify_simple,
                                      compose_sharp, e_minus, e_plus, epsilon_truncate, evaluate,
                                      hamiltonian_vector_field, hofer_norm, inverse, is_admissible_radial, radial,
                                      reparametrize)
from selectorkit.profiles import ProfileFunction

from .conftest import bump


# evaluate ----------------------------------------------------------------

def test_zero_hamiltonian_vanishes(rng):
    Z = ZeroHamiltonian(4)
    X = rng.standard_normal((10, 4))
    assert np.all(Z.value(0.3, X) == 0)
    assert np.all(hamiltonian_vector_field(Z, 0.7, X) == 0)


def test_plateau_value_at_origin(small_bump):
    assert evaluate(small_bump, 0.2, np.zeros(2)) == pytest.approx(0.5, abs=1e-15)


def test_value_vanishes_off_support(small_bump):
    r = small_bump.support_radius
    assert evaluate(small_bump, 0.0, np.array([1.01 * r, 0.0])) == 0.0


def test_sharp_value_matches_pullback(small_bump):
    K = TranslatedHamiltonian(bump(0.3, 0.1, 0.5), [0.2, 0.1])
    HK = compose_sharp(small_bump, K)
    x = np.array([[0.15, -0.05], [0.3, 0.2]])
    t = 0.4
    Y = flow_map(small_bump, x, t, 0.0)
    assert np.allclose(HK.value(t, x), small_bump.value(t, x) + K.value(t, Y), atol=1e-10)


# vector field ------------------------------------------------------------

def test_harmonic_vector_field():
    H = QuadraticHamiltonian.harmonic(2)
    x = np.array([0.3, -0.7])
    assert np.allclose(H.vector_field(0.0, x), [2 * np.pi * 0.7, 2 * np.pi * 0.3])


def test_radial_vector_field_is_scaled_rotation(steep_bump, rng):
    X = rng.uniform(-0.4, 0.4, (20, 2))
    s = np.pi * np.sum(X ** 2, axis=1)
    V = steep_bump.vector_field(0.0, X)
    rot = 2 * np.pi * np.column_stack([-X[:, 1], X[:, 0]])
    assert np.allclose(V, steep_bump.profile.d1(s)[:, None] * rot, atol=1e-12)


@given(st.floats(-0.45, 0.45), st.floats(-0.45, 0.45))
def test_gradient_matches_finite_differences(q, p):
    H = bump(2.0, 0.2, 0.8)
    x = np.array([q, p])
    h = 1e-6
    fd = np.array([(H.value(0, x + h * e) - H.value(0, x - h * e)) / (2 * h) for e in np.eye(2)])
    assert np.allclose(H.gradient(0, x), fd, atol=1e-6)


# Hofer-type integrals ----------------------------------------------------

def test_e_plus_of_zero():
    assert e_plus(ZeroHamiltonian(2)) == 0.0
    assert hofer_norm(ZeroHamiltonian(2)) == 0.0


def test_e_plus_of_simple_is_max(small_bump):
    assert e_plus(small_bump) == pytest.approx(0.5)
    assert hofer_norm(small_bump) == pytest.approx(0.5)


def test_e_plus_separable():
    base = bump(1.5, 0.2, 0.8)
    H = SeparableHamiltonian(lambda t: 1 + np.sin(2 * np.pi * t) ** 2, base)
    # int_0^1 (1 + sin^2) dt = 1.5
    assert e_plus(H) == pytest.approx(1.5 * 1.5, rel=1e-8)


def test_hofer_norm_of_inverse(rng):
    K = TranslatedHamiltonian(bump(0.7, 0.1, 0.5), [0.3, 0.0])
    Km = inverse(K)
    assert hofer_norm(Km) == pytest.approx(hofer_norm(K), abs=1e-6)
    assert e_plus(Km) == pytest.approx(-e_minus(K), abs=1e-6)


# composition and inverse -------------------------------------------------

def test_sharp_with_zero_is_identity(small_bump):
    assert compose_sharp(small_bump, ZeroHamiltonian(2)) is small_bump


def test_k_sharp_k_inverse_vanishes(rng):
    K = bump(1.3, 0.2, 0.8)
    KK = compose_sharp(K, inverse(K))
    X = rng.uniform(-0.5, 0.5, (50, 2))
    assert np.max(np.abs(KK.value(0.5, X))) < 1e-12


def test_sharp_time_one_map_composes():
    H = bump(1.2, 0.2, 0.8)
    K = TranslatedHamiltonian(bump(0.9, 0.1, 0.6), [0.25, -0.1])
    X = np.array([[0.1, 0.2], [-0.2, 0.05], [0.3, -0.3]])
    lhs = flow_map(compose_sharp(H, K), X, closed_form=False)
    rhs = flow_map(H, flow_map(K, X))
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_double_inverse_flow():
    K = TranslatedHamiltonian(bump(0.9, 0.1, 0.6), [0.25, -0.1])
    X = np.array([[0.1, 0.2], [0.3, -0.3]])
    assert np.allclose(flow_map(inverse(inverse(K)), X), flow_map(K, X), atol=1e-8)


def test_inverse_of_zero():
    Z = ZeroHamiltonian(2)
    assert inverse(Z).value(0.0, np.array([0.1, 0.2])) == 0.0


# reparametrization -------------------------------------------------------

def test_identity_reparametrization(small_bump):
    assert reparametrize(small_bump, TimeReparametrization.identity()) is small_bump


def test_reparametrized_orbit_is_time_changed(steep_bump):
    lam = TimeReparametrization.power(2)
    Hl = reparametrize(steep_bump, lam)
    x0 = np.array([[0.3, 0.1]])
    ts = np.linspace(0, 1, 5)
    for t in ts:
        a = flow_map(Hl, x0, 0.0, t, closed_form=False)
        b = flow_map(steep_bump, x0, 0.0, t * t)
        assert np.allclose(a, b, atol=1e-8)


def test_bad_reparametrization_rejected():
    with pytest.raises(InputError):
        TimeReparametrization(lambda t: 0.5 * t, lambda t: 0.5)


# simplicity and admissibility -------------------------------------------

def test_zero_is_simple():
    rep = classify_simple(ZeroHamiltonian(2))
    assert rep.is_simple and rep.max_value == 0.0


def test_monotone_bump_is_simple(small_bump):
    rep = classify_simple(small_bump)
    assert rep.is_simple and rep.max_value == pytest.approx(0.5)


def test_shelf_is_not_simple():
    H = RadialHamiltonian(ProfileFunction.shelf(1.0, 0.5, 0.1, 0.3, 0.5, 0.9), 2)
    rep = classify_simple(H)
    assert not rep.is_simple
    assert rep.unresolved and rep.unresolved[0] == pytest.approx(0.5)


def test_admissibility_by_slope():
    assert is_admissible_radial(ProfileFunction.bump(0.5, 0.2, 0.8))
    assert not is_admissible_radial(radial([0, 0.5, 1.0], [0.75, 0.375, 0.0], [0.0, -1.5, 0.0]).profile)
    assert is_admissible_radial(ProfileFunction.zero())


def test_admissibility_matches_flow_period():
    # slope 0.9: the circle at that level needs time 1/0.9 > 1 to close
    H = bump(0.9 * 0.54, 0.2, 0.8)
    s = 0.5
    x = np.array([[np.sqrt(s / np.pi), 0.0]])
    t_close = 1.0 / abs(float(H.profile.d1(np.array([s]))[0]))
    assert t_close > 1.0
    back = H.rotation_flow(x, t_close)
    assert np.allclose(back, x, atol=1e-12)
    assert not np.allclose(H.rotation_flow(x, 1.0), x, atol=1e-3)


# epsilon truncation ------------------------------------------------------

def test_epsilon_truncate_max():
    H = RadialHamiltonian(ProfileFunction.shelf(1.0, 0.3, 0.1, 0.4, 0.5, 0.95), 2)
    K = epsilon_truncate(H, 0.5, 0.1)
    assert K.max_value == pytest.approx(0.4, abs=1e-14)
    X = np.random.default_rng(0).uniform(-0.6, 0.6, (500, 2))
    assert np.all(K.value(0.0, X) <= H.value(0.0, X) + 1e-12)


def test_epsilon_truncate_preserves_admissibility():
    H = RadialHamiltonian(ProfileFunction.shelf(0.3, 0.09, 0.05, 0.45, 0.55, 0.95), 2)
    assert is_admissible_radial(H.profile)
    K = epsilon_truncate(H, 0.3, 0.02)
    assert is_admissible_radial(K.profile)


def test_epsilon_truncate_rejects_bad_eps(small_bump):
    with pytest.raises(InputError):
        epsilon_truncate(small_bump, 1.2, 0.1)


@given(st.floats(0.05, 0.9), st.floats(0.3, 2.0))
def test_truncation_max_property(eps, height):
    H = bump(height, 0.2, 0.8)
    delta = 0.5 * (1 - eps) * height
    K = epsilon_truncate(H, eps, delta)
    assert K.max_value == pytest.approx((1 - eps) * height - delta, abs=1e-12)


@given(st.floats(0.1, 3.0), st.floats(0.1, 0.4), st.floats(0.5, 1.0))
def test_radial_hamiltonian_properties(height, p_end, s_end):
    H = bump(height, p_end, s_end)
    x = np.array([[0.05, 0.02], [0.2, 0.3]])
    # energy is conserved by the exact flow
    assert np.allclose(H.value(0, H.rotation_flow(x, 0.37)), H.value(0, x), atol=1e-12)
    assert hofer_norm(H) == pytest.approx(height, rel=1e-9)
