import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from selectorkit.flows import omega0
from selectorkit.hamiltonians import ZeroHamiltonian
from selectorkit.loops import (FourierLoop, action, gradient, graph_to_cotangent, h12_inner, h12_norm,
                               loop_residual, quadrature_action, split)
from selectorkit.spectrum import find_orbits

from .conftest import bump


def test_inner_of_constants():
    c = np.array([0.3, -1.2])
    x = FourierLoop.constant(c, kmax=4)
    assert h12_inner(x, x) == pytest.approx(c @ c)


def test_inner_of_single_mode():
    v = np.array([0.7, 0.2])
    x = FourierLoop.single_mode(1, v, kmax=4)
    assert h12_inner(x, x) == pytest.approx(2 * np.pi * v @ v)


def test_distinct_modes_are_orthogonal():
    x = FourierLoop.single_mode(2, [1.0, 0.5], kmax=4)
    y = FourierLoop.single_mode(-1, [1.0, 0.5], kmax=4)
    assert h12_inner(x, y) == 0.0


def test_split_constant_and_positive():
    c = FourierLoop.constant([1.0, 2.0], kmax=3)
    m, z, p = split(c)
    assert h12_norm(m) == 0 and h12_norm(p) == 0 and np.array_equal(z.coeffs, c.coeffs)
    x = FourierLoop.single_mode(1, [1.0, 0.0], kmax=3)
    m, z, p = split(x)
    assert np.array_equal(p.coeffs, x.coeffs) and h12_norm(m) == 0 and h12_norm(z) == 0


@given(st.integers(0, 10 ** 6))
def test_split_reassembles_and_is_orthogonal(seed):
    x = FourierLoop.random(4, kmax=6, rng=seed)
    m, z, p = split(x)
    assert np.allclose(m.coeffs + z.coeffs + p.coeffs, x.coeffs, atol=0)
    for a, b in ((m, z), (m, p), (z, p)):
        assert abs(h12_inner(a, b)) < 1e-12


def test_action_of_zero_on_constant():
    assert action(ZeroHamiltonian(2), FourierLoop.constant([0.4, 0.1], kmax=4)) == 0.0


def test_action_of_circle_matches_stokes():
    r = 0.8
    x = FourierLoop.single_mode(1, [r, 0.0], kmax=8)
    a = action(ZeroHamiltonian(2), x)
    assert abs(a) == pytest.approx(np.pi * r * r)
    # direct area integral -1/2 int omega0(x, x') on the nodes
    t = np.arange(256) / 256
    X, V = x.samples(256), x.derivative(n_nodes=256)
    assert a == pytest.approx(-0.5 * np.mean(omega0(X, V)), abs=1e-12)
    assert a == pytest.approx(quadrature_action(ZeroHamiltonian(2), t, np.full(256, 1 / 256), X, V), abs=1e-12)


def test_action_of_constant_on_plateau(small_bump):
    assert action(small_bump, FourierLoop.constant([0.01, 0.0], kmax=4)) == pytest.approx(0.5)


def test_gradient_of_zero_on_positive_mode():
    x = FourierLoop.single_mode(2, [0.3, -0.4], kmax=4)
    g = gradient(ZeroHamiltonian(2), x)
    assert np.allclose(g.coeffs, x.coeffs)


@given(st.integers(0, 10 ** 6))
def test_gradient_matches_finite_differences(seed):
    H = bump(1.7, 0.2, 0.8)
    x = FourierLoop.random(2, kmax=6, rng=seed, decay=2.0)
    x = FourierLoop(0.25 * x.coeffs)
    v = FourierLoop.random(2, kmax=6, rng=seed + 1, decay=2.0)
    h = 1e-5
    fd = (action(H, FourierLoop(x.coeffs + h * v.coeffs), n_nodes=128)
          - action(H, FourierLoop(x.coeffs - h * v.coeffs), n_nodes=128)) / (2 * h)
    g = h12_inner(gradient(H, x, n_nodes=128), v)
    assert abs(fd - g) <= 1e-6 * (1 + h12_norm(v))


def test_gradient_vanishes_at_orbit(steep_bump):
    orbits, _ = find_orbits(steep_bump)
    o = next(o for o in orbits if not o.constant)
    assert h12_norm(gradient(steep_bump, o.loop)) < 1e-7
    assert np.max(np.abs(loop_residual(steep_bump, o.loop))) < 1e-7


def test_graph_to_cotangent_examples():
    q, p = np.array([0.3]), np.array([-0.2])
    base, fiber = graph_to_cotangent(q, p, q, p)
    assert np.allclose(base, [0.3, -0.2]) and np.allclose(fiber, 0)
    Q, P = np.array([1.0]), np.array([2.0])
    base, fiber = graph_to_cotangent(np.zeros(1), np.zeros(1), Q, P)
    assert np.allclose(base, [0.5, 1.0]) and np.allclose(fiber, [-2.0, 1.0])


@given(st.integers(0, 10 ** 6))
def test_graph_to_cotangent_pullback(seed):
    # the linear map pulls (-omega0) + omega0 back to the canonical form
    # dxi ^ dx summed over base/fiber pairs
    rng = np.random.default_rng(seed)
    n = 2
    d = 4 * n

    def lin(u):
        q, p, Q, P = u[:n], u[n:2 * n], u[2 * n:3 * n], u[3 * n:]
        b, f = graph_to_cotangent(q, p, Q, P)
        return b, f

    u, w = rng.standard_normal(d), rng.standard_normal(d)
    bu, fu = lin(u)
    bw, fw = lin(w)
    canonical = fu @ bw - fw @ bu

    def om(a, b):
        return float(omega0(a, b))

    src = -om(u[:2 * n], w[:2 * n]) + om(u[2 * n:], w[2 * n:])
    assert canonical == pytest.approx(src, abs=1e-10)
