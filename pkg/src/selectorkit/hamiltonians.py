"""Compactly supported Hamiltonians on (R^2n, omega0) and their algebra.

Coordinates are ``x = (q_1..q_n, p_1..p_n)`` and the Hamiltonian vector
field is ``X_H = J0 grad H = (-dH/dp, dH/dq)``, so ``H = pi |x|^2``
rotates each (q_j, p_j) plane counterclockwise with period 1.

All descriptors share a small private interface on stacked points
``X`` of shape (N, 2n): ``_value``, ``_gradient``, ``_hessian`` and
``_vector_field``.  The public ``value``/``gradient``/``hessian`` methods
validate input and accept a single point as well.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _quad
from scipy.optimize import minimize
from scipy.stats import qmc

from ._validation import check_dimension, check_points, check_positive, check_time
from .exceptions import ConvergenceError, InputError
from .flows import apply_j, flow_map
from .profiles import ComposedProfile, ProfileFunction, add_profiles, clamped_ramp


class Hamiltonian:
    """Base class for time-dependent Hamiltonians ``H: [0, 1] x R^2n -> R``.

    Attributes
    ----------
    dim : int
        Phase-space dimension 2n.
    support_radius : float or None
        Radius of a closed ball containing ``supp H_t`` for every t;
        ``None`` for non-compactly supported test functions.
    autonomous : bool
    breakpoints : tuple of float
        Interior times where the time dependence is not smooth.
    """

    dim = 2
    support_radius = None
    autonomous = False
    breakpoints = ()
    is_zero = False

    # private stacked interface -----------------------------------------
    def _value(self, t, X):
        raise NotImplementedError

    def _gradient(self, t, X):
        raise NotImplementedError

    def _hessian(self, t, X):
        # central differences of the gradient
        N, d = X.shape
        h = 1e-6 * (1.0 + np.abs(X))
        out = np.empty((N, d, d))
        for j in range(d):
            E = np.zeros_like(X)
            E[:, j] = h[:, j]
            out[:, :, j] = (self._gradient(t, X + E) - self._gradient(t, X - E)) / (2 * h[:, j:j + 1])
        return 0.5 * (out + out.transpose(0, 2, 1))

    def _vector_field(self, t, X):
        return apply_j(self._gradient(t, X))

    # public interface -------------------------------------------------
    def _prep(self, t, x):
        X, single = check_points(x, self.dim)
        return check_time(t), X, single

    def value(self, t, x):
        t, X, single = self._prep(t, x)
        v = self._value(t, X)
        return float(v[0]) if single else v

    __call__ = value

    def gradient(self, t, x):
        t, X, single = self._prep(t, x)
        g = self._gradient(t, X)
        return g[0] if single else g

    def hessian(self, t, x):
        t, X, single = self._prep(t, x)
        A = self._hessian(t, X)
        return A[0] if single else A

    def vector_field(self, t, x):
        t, X, single = self._prep(t, x)
        V = self._vector_field(t, X)
        return V[0] if single else V

    def closed_flow(self, t0, t1, X, jac=False):
        """Explicit flow from ``t0`` to ``t1`` or ``None`` if unavailable."""
        return None

    def slice_extrema(self, t, seed=0, tol=1e-8):
        """``(min_x H(t, x), max_x H(t, x))``; 0 is always attained off the support."""
        return _numeric_extrema(self, t, seed=seed, tol=tol)


def _numeric_extrema(H, t, seed=0, tol=1e-8, base=256, max_level=6):
    R = H.support_radius
    if R is None:
        raise InputError("extrema of a non-compactly supported Hamiltonian are not defined")
    d = H.dim
    sampler = qmc.Sobol(d, scramble=True, seed=seed)
    cloud = np.zeros((0, d))
    prev = None
    for level in range(max_level):
        n = base * 2 ** level
        pts = R * (2 * sampler.random(n) - 1)
        pts = pts[np.einsum("ij,ij->i", pts, pts) <= R * R]
        cloud = np.vstack([cloud, pts])
        vals = H._value(t, cloud)
        lo, hi = min(0.0, vals.min()), max(0.0, vals.max())
        for sign in (1.0, -1.0):
            order = np.argsort(sign * vals)[-6:]
            for i in order:
                res = minimize(lambda x: -sign * H._value(t, x[None, :])[0], cloud[i],
                               jac=lambda x: -sign * H._gradient(t, x[None, :])[0],
                               method="L-BFGS-B", bounds=[(-R, R)] * d,
                               options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 200})
                v = -sign * float(res.fun)
                lo, hi = min(lo, v), max(hi, v)
        if prev is not None and abs(hi - prev[1]) < tol and abs(lo - prev[0]) < tol:
            return lo, hi
        prev = (lo, hi)
    raise ConvergenceError("extremum search did not stabilise", best=prev)


# --------------------------------------------------------------------------
# concrete descriptors


class ZeroHamiltonian(Hamiltonian):
    """``H = 0``."""

    autonomous = True
    is_zero = True

    def __init__(self, dim=2):
        self.dim = check_dimension(dim)
        self.support_radius = 0.0

    def _value(self, t, X):
        return np.zeros(X.shape[0])

    def _gradient(self, t, X):
        return np.zeros_like(X)

    def _hessian(self, t, X):
        return np.zeros((X.shape[0], X.shape[1], X.shape[1]))

    def closed_flow(self, t0, t1, X, jac=False):
        X = X.copy()
        if jac:
            return X, np.broadcast_to(np.eye(self.dim), (X.shape[0], self.dim, self.dim)).copy()
        return X

    def slice_extrema(self, t, **kw):
        return 0.0, 0.0


class RadialHamiltonian(Hamiltonian):
    """``H(x) = h(pi |x|^2)`` for a profile ``h``.

    The flow rotates every complex coordinate ``z_j = q_j + i p_j`` by the
    angle ``2 pi h'(s) t`` with ``s = pi |x|^2`` preserved, which gives
    exact flows and Jacobians.
    """

    autonomous = True

    def __init__(self, profile, dim=2):
        self.profile = profile
        self.dim = check_dimension(dim)
        self.support_radius = float(profile.support_radius)

    @property
    def is_zero(self):
        v = getattr(self.profile, "values", None)
        s = getattr(self.profile, "slopes", None)
        return v is not None and not np.any(v) and not np.any(s)

    def _s(self, X):
        return np.pi * np.einsum("ij,ij->i", X, X)

    def _value(self, t, X):
        return self.profile.value(self._s(X))

    def _gradient(self, t, X):
        return (2 * np.pi * self.profile.d1(self._s(X)))[:, None] * X

    def _hessian(self, t, X):
        s = self._s(X)
        a = 2 * np.pi * self.profile.d1(s)
        b = 4 * np.pi ** 2 * self.profile.d2(s)
        return a[:, None, None] * np.eye(self.dim) + b[:, None, None] * np.einsum("ni,nj->nij", X, X)

    def _rotate(self, X, theta):
        n = self.dim // 2
        c, s = np.cos(theta)[:, None], np.sin(theta)[:, None]
        Q, P = X[:, :n], X[:, n:]
        return np.concatenate([c * Q - s * P, s * Q + c * P], axis=1)

    def rotation_flow(self, X, duration, jac=False):
        """Flow for a total time ``duration`` (any real number)."""
        s = self._s(X)
        theta = 2 * np.pi * self.profile.d1(s) * duration
        Y = self._rotate(X, theta)
        if not jac:
            return Y
        d = self.dim
        eye = np.eye(d)
        Rm = np.empty((X.shape[0], d, d))
        for j in range(d):
            Rm[:, :, j] = self._rotate(np.broadcast_to(eye[j], X.shape), theta)
        grad_theta = (4 * np.pi ** 2 * duration * self.profile.d2(s))[:, None] * X
        JRx = apply_j(Y)
        return Y, Rm + np.einsum("ni,nj->nij", JRx, grad_theta)

    def closed_flow(self, t0, t1, X, jac=False):
        return self.rotation_flow(X, t1 - t0, jac=jac)

    def slice_extrema(self, t, **kw):
        lo, hi = self.profile.extrema()
        return min(lo, 0.0), max(hi, 0.0)

    def scaled(self, c):
        return RadialHamiltonian(self.profile.scaled(c), self.dim)

    def __repr__(self):
        return f"RadialHamiltonian({self.profile!r}, dim={self.dim})"


class QuadraticHamiltonian(Hamiltonian):
    """``H(x) = x^T S x / 2``; not compactly supported, used as a sign test case."""

    autonomous = True

    def __init__(self, S):
        S = np.asarray(S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise InputError("S must be square")
        self.S = 0.5 * (S + S.T)
        self.dim = check_dimension(S.shape[0])

    @classmethod
    def harmonic(cls, dim=2):
        """``H = pi |x|^2``."""
        return cls(2 * np.pi * np.eye(dim))

    def _value(self, t, X):
        return 0.5 * np.einsum("ni,ij,nj->n", X, self.S, X)

    def _gradient(self, t, X):
        return X @ self.S

    def _hessian(self, t, X):
        return np.broadcast_to(self.S, (X.shape[0],) + self.S.shape).copy()


class TimeDependentHamiltonian(Hamiltonian):
    """Wrap user callables ``f(t, X)``, ``grad(t, X)`` (and optionally ``hess``)."""

    def __init__(self, func, grad, dim, support_radius, hess=None, autonomous=False, breakpoints=()):
        self.func, self.grad, self.hess = func, grad, hess
        self.dim = check_dimension(dim)
        self.support_radius = check_positive(support_radius, "support_radius", allow_zero=True)
        self.autonomous = bool(autonomous)
        self.breakpoints = tuple(breakpoints)

    def _value(self, t, X):
        return np.asarray(self.func(t, X), dtype=float)

    def _gradient(self, t, X):
        return np.asarray(self.grad(t, X), dtype=float)

    def _hessian(self, t, X):
        if self.hess is None:
            return super()._hessian(t, X)
        return np.asarray(self.hess(t, X), dtype=float)


class SeparableHamiltonian(Hamiltonian):
    """``H(t, x) = beta(t) * base(x)`` for an autonomous base.

    ``beta_integral(t0, t1)`` defaults to adaptive quadrature of ``beta``.
    """

    def __init__(self, beta, base, beta_integral=None, breakpoints=()):
        if not base.autonomous:
            raise InputError("separable Hamiltonians need an autonomous base")
        self.beta, self.base = beta, base
        self._beta_integral = beta_integral
        self.dim = base.dim
        self.support_radius = base.support_radius
        self.breakpoints = tuple(breakpoints)

    def beta_integral(self, t0, t1):
        if self._beta_integral is not None:
            return float(self._beta_integral(t0, t1))
        return float(_quad.quad(lambda s: float(self.beta(s)), t0, t1, epsabs=1e-14, epsrel=1e-13, limit=200)[0])

    def _value(self, t, X):
        return float(self.beta(t)) * self.base._value(t, X)

    def _gradient(self, t, X):
        return float(self.beta(t)) * self.base._gradient(t, X)

    def _hessian(self, t, X):
        return float(self.beta(t)) * self.base._hessian(t, X)

    def closed_flow(self, t0, t1, X, jac=False):
        if isinstance(self.base, RadialHamiltonian):
            return self.base.rotation_flow(X, self.beta_integral(t0, t1), jac=jac)
        return None

    def slice_extrema(self, t, **kw):
        lo, hi = self.base.slice_extrema(0.0, **kw)
        b = float(self.beta(t))
        return (b * lo, b * hi) if b >= 0 else (b * hi, b * lo)


class TranslatedHamiltonian(Hamiltonian):
    """``H_c(t, x) = H(t, x - c)``; flows are conjugated by the translation."""

    def __init__(self, base, center):
        self.base = base
        self.center = np.asarray(center, dtype=float)
        if self.center.shape != (base.dim,):
            raise InputError("center has the wrong dimension")
        self.dim = base.dim
        self.autonomous = base.autonomous
        self.breakpoints = base.breakpoints
        self.support_radius = None if base.support_radius is None else \
            base.support_radius + float(np.linalg.norm(self.center))

    def _value(self, t, X):
        return self.base._value(t, X - self.center)

    def _gradient(self, t, X):
        return self.base._gradient(t, X - self.center)

    def _hessian(self, t, X):
        return self.base._hessian(t, X - self.center)

    def closed_flow(self, t0, t1, X, jac=False):
        res = self.base.closed_flow(t0, t1, X - self.center, jac=jac)
        if res is None:
            return None
        if jac:
            return res[0] + self.center, res[1]
        return res + self.center

    def slice_extrema(self, t, **kw):
        return self.base.slice_extrema(t, **kw)


class ScaledHamiltonian(Hamiltonian):
    """``c * H``."""

    def __init__(self, base, factor):
        self.base, self.factor = base, float(factor)
        self.dim = base.dim
        self.autonomous = base.autonomous
        self.breakpoints = base.breakpoints
        self.support_radius = base.support_radius
        self.is_zero = self.factor == 0.0 or base.is_zero

    def _value(self, t, X):
        return self.factor * self.base._value(t, X)

    def _gradient(self, t, X):
        return self.factor * self.base._gradient(t, X)

    def _hessian(self, t, X):
        return self.factor * self.base._hessian(t, X)

    def closed_flow(self, t0, t1, X, jac=False):
        if self.base.autonomous:
            return self.base.closed_flow(0.0, self.factor * (t1 - t0), X, jac=jac)
        return None

    def slice_extrema(self, t, **kw):
        lo, hi = self.base.slice_extrema(t, **kw)
        c = self.factor
        return (c * lo, c * hi) if c >= 0 else (c * hi, c * lo)


class SharpHamiltonian(Hamiltonian):
    """``(H # K)(t, x) = H(t, x) + K(t, (phi_H^t)^{-1}(x))``, generating ``phi_H o phi_K``.

    When both parts are radial (same centre) the flows commute and
    ``K o (phi_H^t)^{-1} = K``; this case is evaluated without integration.
    """

    def __init__(self, H, K):
        if H.dim != K.dim:
            raise InputError("dimension mismatch in composition")
        self.H, self.K = H, K
        self.dim = H.dim
        self.autonomous = H.autonomous and K.autonomous and self._commuting()
        self.breakpoints = tuple(sorted(set(H.breakpoints) | set(K.breakpoints)))
        radii = [r for r in (H.support_radius, K.support_radius) if r is not None]
        self.support_radius = max(radii) if len(radii) == 2 else None

    def _commuting(self):
        return isinstance(self.H, RadialHamiltonian) and isinstance(self.K, RadialHamiltonian)

    def _pullback(self, t, X, jac):
        """``Y = (phi_H^t)^{-1}(X)`` and its Jacobian."""
        if t == 0.0:
            return (X.copy(), np.broadcast_to(np.eye(self.dim), (len(X), self.dim, self.dim))) if jac else X.copy()
        return flow_map(self.H, X, t, 0.0, jac=jac)

    def _value(self, t, X):
        if self._commuting():
            return self.H._value(t, X) + self.K._value(t, X)
        return self.H._value(t, X) + self.K._value(t, self._pullback(t, X, False))

    def _gradient(self, t, X):
        if self._commuting():
            return self.H._gradient(t, X) + self.K._gradient(t, X)
        Y, N = self._pullback(t, X, True)
        return self.H._gradient(t, X) + np.einsum("nji,nj->ni", N, self.K._gradient(t, Y))

    def _hessian(self, t, X):
        if self._commuting():
            return self.H._hessian(t, X) + self.K._hessian(t, X)
        return super()._hessian(t, X)

    def closed_flow(self, t0, t1, X, jac=False):
        if self._commuting():
            return self.as_radial().closed_flow(t0, t1, X, jac=jac)
        return None

    def as_radial(self):
        """Radial form ``h_H + h_K`` when both parts are radial."""
        if not self._commuting():
            raise InputError("only radial compositions have a radial form")
        return RadialHamiltonian(add_profiles(self.H.profile, self.K.profile), self.dim)

    def slice_extrema(self, t, **kw):
        if self._commuting():
            return self.as_radial().slice_extrema(t)
        return super().slice_extrema(t, **kw)


class InverseHamiltonian(Hamiltonian):
    """``K^-(t, x) = -K(t, phi_K^t(x))``, generating ``(phi_K^t)^{-1}``."""

    def __init__(self, K):
        self.K = K
        self.dim = K.dim
        self.autonomous = K.autonomous
        self.breakpoints = K.breakpoints
        self.support_radius = K.support_radius
        self.is_zero = K.is_zero

    def _push(self, t, X, jac):
        if t == 0.0 or self.K.autonomous:
            if jac:
                return X.copy(), np.broadcast_to(np.eye(self.dim), (len(X), self.dim, self.dim))
            return X.copy()
        return flow_map(self.K, X, 0.0, t, jac=jac)

    def _value(self, t, X):
        # autonomous K is preserved by its own flow, so no integration is needed
        return -self.K._value(t, self._push(t, X, False))

    def _gradient(self, t, X):
        if self.K.autonomous:
            return -self.K._gradient(t, X)
        Y, M = self._push(t, X, True)
        return -np.einsum("nji,nj->ni", M, self.K._gradient(t, Y))

    def _hessian(self, t, X):
        if self.K.autonomous:
            return -self.K._hessian(t, X)
        return super()._hessian(t, X)

    def closed_flow(self, t0, t1, X, jac=False):
        if self.K.autonomous:
            return self.K.closed_flow(t1, t0, X, jac=jac)
        return None

    def slice_extrema(self, t, **kw):
        # max_x -K(t, phi(x)) = -min K_t since phi_K^t is a bijection
        lo, hi = self.K.slice_extrema(t, **kw)
        return -hi, -lo


class ReparametrizedHamiltonian(Hamiltonian):
    """``H^lambda(t, x) = lambda'(t) H(lambda(t), x)``; its flow is ``phi_H^{lambda(t)}``."""

    def __init__(self, H, lam):
        self.H, self.lam = H, lam
        self.dim = H.dim
        self.support_radius = H.support_radius
        self.autonomous = H.autonomous and lam.is_identity
        self.breakpoints = tuple(sorted(set(lam.breakpoints) |
                                        {float(b) for b in lam.preimages(H.breakpoints)}))
        self.is_zero = H.is_zero

    def _value(self, t, X):
        return self.lam.d1(t) * self.H._value(self.lam(t), X)

    def _gradient(self, t, X):
        return self.lam.d1(t) * self.H._gradient(self.lam(t), X)

    def _hessian(self, t, X):
        return self.lam.d1(t) * self.H._hessian(self.lam(t), X)

    def closed_flow(self, t0, t1, X, jac=False):
        return self.H.closed_flow(self.lam(t0), self.lam(t1), X, jac=jac)

    def slice_extrema(self, t, **kw):
        lo, hi = self.H.slice_extrema(self.lam(t), **kw)
        c = self.lam.d1(t)
        return (c * lo, c * hi) if c >= 0 else (c * hi, c * lo)


class ComposedHamiltonian(Hamiltonian):
    """``f o H`` for an autonomous ``H`` and a scalar ``f`` with ``f(0) = 0``."""

    autonomous = True

    def __init__(self, f, H):
        if not H.autonomous:
            raise InputError("composition f o H needs an autonomous H")
        self.f, self.H = f, H
        self.dim = H.dim
        self.support_radius = H.support_radius

    def _value(self, t, X):
        return self.f.value(self.H._value(t, X))

    def _gradient(self, t, X):
        return self.f.d1(self.H._value(t, X))[:, None] * self.H._gradient(t, X)

    def _hessian(self, t, X):
        v = self.H._value(t, X)
        g = self.H._gradient(t, X)
        return (self.f.d2(v)[:, None, None] * np.einsum("ni,nj->nij", g, g)
                + self.f.d1(v)[:, None, None] * self.H._hessian(t, X))


class ShellHamiltonian(Hamiltonian):
    """``H(x) = f(F(x) - 1)`` for a 2-homogeneous gauge ``F``.

    The level ``{F = 1 + t}`` is the thickening ``sqrt(1 + t) S`` of
    ``S = {F = 1}``, so ``H = f(t)`` on ``S_t``.
    """

    autonomous = True

    def __init__(self, gauge, f):
        self.gauge, self.f = gauge, f
        self.dim = gauge.dim
        top = float(np.max(f.knots)) if hasattr(f, "knots") else 1.0
        self.support_radius = float(gauge.max_radius(1.0 + top))

    def _value(self, t, X):
        return self.f.value(self.gauge.value(X) - 1.0)

    def _gradient(self, t, X):
        return self.f.d1(self.gauge.value(X) - 1.0)[:, None] * self.gauge.gradient(X)

    def _hessian(self, t, X):
        u = self.gauge.value(X) - 1.0
        g = self.gauge.gradient(X)
        return (self.f.d2(u)[:, None, None] * np.einsum("ni,nj->nij", g, g)
                + self.f.d1(u)[:, None, None] * self.gauge.hessian(X))

    def slice_extrema(self, t, **kw):
        lo, hi = self.f.extrema()
        return min(lo, 0.0), max(hi, 0.0)


# --------------------------------------------------------------------------
# time reparametrizations


class TimeReparametrization:
    """Monotone ``lambda: [0, 1] -> [0, 1]`` with ``lambda(0) = 0``, ``lambda(1) = 1``."""

    def __init__(self, func, dfunc, name="custom", breakpoints=(), inverse=None, check=True):
        self.func, self.dfunc, self.name = func, dfunc, name
        self.breakpoints = tuple(breakpoints)
        self._inverse = inverse
        if check:
            if abs(float(func(0.0))) > 1e-14 or abs(float(func(1.0)) - 1.0) > 1e-14:
                raise InputError("reparametrization must satisfy lambda(0) = 0 and lambda(1) = 1")
            grid = np.linspace(0.0, 1.0, 257)
            if np.any(np.array([dfunc(t) for t in grid]) < -1e-14):
                raise InputError("reparametrization must be monotone")

    @property
    def is_identity(self):
        return self.name == "identity"

    def __call__(self, t):
        return float(self.func(t))

    def d1(self, t):
        return float(self.dfunc(t))

    def preimages(self, times):
        if self._inverse is None:
            return ()
        return tuple(self._inverse(s) for s in times)

    @classmethod
    def identity(cls):
        return cls(lambda t: t, lambda t: 1.0, "identity", inverse=lambda s: s)

    @classmethod
    def power(cls, k=2.0):
        k = float(k)
        return cls(lambda t: t ** k, lambda t: k * t ** (k - 1), f"power{k:g}", inverse=lambda s: s ** (1 / k))

    @classmethod
    def smoothstep(cls):
        return cls(lambda t: 3 * t * t - 2 * t ** 3, lambda t: 6 * t - 6 * t * t, "smoothstep")

    @classmethod
    def delayed(cls):
        """Zero on [0, 1/2], then a C^1 rise to 1."""
        def f(t):
            u = max(0.0, 2 * t - 1)
            return 3 * u * u - 2 * u ** 3

        def df(t):
            u = max(0.0, 2 * t - 1)
            return 2 * (6 * u - 6 * u * u)

        return cls(f, df, "delayed", breakpoints=(0.5,))


# --------------------------------------------------------------------------
# operations


def evaluate(H, t, x):
    """``H(t, x)``; 0 outside the support."""
    return H.value(t, x)


def hamiltonian_vector_field(H, t, x):
    """``X_H(t, x) = (-dH/dp, dH/dq)``."""
    return H.vector_field(t, x)


def compose_sharp(H, K):
    """Descriptor of ``H # K`` (time-one map ``phi_H o phi_K``)."""
    if K.is_zero:
        return H
    if H.is_zero and H.dim == K.dim:
        # phi_0 = id, so (0 # K)(t, x) = K(t, x)
        return K
    return SharpHamiltonian(H, K)


def inverse(K):
    """Descriptor of ``K^-`` (time-one map ``phi_K^{-1}``)."""
    if isinstance(K, RadialHamiltonian):
        return RadialHamiltonian(K.profile.scaled(-1.0), K.dim)
    return InverseHamiltonian(K)


def reparametrize(H, lam):
    """``H^lambda(t, x) = lambda'(t) H(lambda(t), x)``."""
    if not isinstance(lam, TimeReparametrization):
        raise InputError("lam must be a TimeReparametrization")
    if lam.is_identity:
        return H
    return ReparametrizedHamiltonian(H, lam)


def scale(H, c):
    """``c H``; radial inputs stay radial."""
    if isinstance(H, RadialHamiltonian):
        return H.scaled(c)
    return ScaledHamiltonian(H, c)


def _time_quadrature(H, fun, tol=1e-8, orders=(4, 8, 16, 32)):
    if H.autonomous:
        return fun(0.0)
    cuts = np.unique(np.concatenate([[0.0, 1.0], np.clip(np.asarray(H.breakpoints, dtype=float), 0, 1)]))
    prev = None
    for m in orders:
        x, w = np.polynomial.legendre.leggauss(m)
        total = 0.0
        for a, b in zip(cuts[:-1], cuts[1:]):
            for xi, wi in zip(x, w):
                total += 0.5 * (b - a) * wi * fun(0.5 * (b - a) * xi + 0.5 * (a + b))
        if prev is not None and abs(total - prev) < tol * (1 + abs(total)):
            return total
        prev = total
    raise ConvergenceError("time quadrature did not converge", best=prev)


def e_plus(H, tol=1e-8, seed=0):
    """``E^+(H) = int_0^1 max_x H(t, x) dt``.

    Raises
    ------
    ConvergenceError
        With the best available value in ``best``.
    """
    return float(_time_quadrature(H, lambda t: H.slice_extrema(t, seed=seed, tol=tol)[1], tol=tol))


def e_minus(H, tol=1e-8, seed=0):
    """``int_0^1 min_x H(t, x) dt``."""
    return float(_time_quadrature(H, lambda t: H.slice_extrema(t, seed=seed, tol=tol)[0], tol=tol))


def hofer_norm(H, tol=1e-8, seed=0):
    """``||H|| = int_0^1 (max_x H_t - min_x H_t) dt``."""
    def osc(t):
        lo, hi = H.slice_extrema(t, seed=seed, tol=tol)
        return hi - lo

    return float(_time_quadrature(H, osc, tol=tol))


@dataclass
class SimplicityReport:
    """Outcome of :func:`classify_simple`.

    ``critical_values`` are the detected values; ``unresolved`` those outside
    both bands {0} and {max H}.  ``plateau`` is a witness region where H
    equals its maximum: ``(s_lo, s_hi)`` in ``s = pi |x|^2`` for radial H, or
    ``(center, radius)`` otherwise.
    """

    is_simple: bool
    max_value: float
    min_value: float
    critical_values: np.ndarray
    unresolved: list = field(default_factory=list)
    plateau: object = None


def classify_simple(H, tol=1e-9, seed=0, n_starts=256):
    """Check (P1) ``H >= 0``, (P2) a plateau at ``max H`` and (P3) critical values in {0, max H}."""
    if not H.autonomous:
        raise InputError("classify_simple needs a time-independent Hamiltonian")
    if H.is_zero:
        return SimplicityReport(True, 0.0, 0.0, np.array([0.0]), [], None)
    if isinstance(H, RadialHamiltonian):
        prof = H.profile
        lo, hi = prof.extrema()
        lo = min(lo, 0.0)
        crit = prof.critical_values()
        roots, bands = prof.derivative_roots(0.0)
        plateau = None
        for a, b in bands:
            if b - a > 0 and abs(float(prof.value(np.array([0.5 * (a + b)]))[0]) - hi) <= tol:
                plateau = (float(a), float(b))
                break
    else:
        lo, hi = H.slice_extrema(0.0, seed=seed)
        crit, plateau = _numeric_critical_values(H, hi, tol, seed, n_starts)
    scale_ = max(1.0, abs(hi))
    unresolved = [float(v) for v in crit if abs(v) > tol * scale_ and abs(v - hi) > tol * scale_]
    ok = lo >= -tol * scale_ and plateau is not None and not unresolved
    if hi <= tol * scale_:
        ok = abs(lo) <= tol * scale_
    return SimplicityReport(bool(ok), float(hi), float(lo), np.asarray(crit, dtype=float), unresolved, plateau)


def _numeric_critical_values(H, hi, tol, seed, n_starts):
    d, R = H.dim, H.support_radius
    rng = np.random.default_rng(seed)
    starts = rng.uniform(-R, R, size=(n_starts, d))
    starts = starts[np.einsum("ij,ij->i", starts, starts) < R * R]
    found = [0.0]
    plateau = None

    def obj(x):
        g = H._gradient(0.0, x[None, :])[0]
        A = H._hessian(0.0, x[None, :])[0]
        return float(g @ g), 2 * A @ g

    for x0 in starts:
        res = minimize(obj, x0, jac=True, method="BFGS", options={"gtol": 1e-14, "maxiter": 400})
        g = H._gradient(0.0, res.x[None, :])[0]
        if np.linalg.norm(g) < 1e-6:
            v = float(H._value(0.0, res.x[None, :])[0])
            found.append(v)
            if plateau is None and abs(v - hi) <= tol * max(1.0, abs(hi)):
                r = 1e-3 * max(R, 1e-12)
                probe = res.x + r * rng.standard_normal((32, d)) / np.sqrt(d)
                if np.all(np.abs(H._value(0.0, probe) - hi) <= tol * max(1.0, abs(hi))):
                    plateau = (res.x, r)
    vals = np.sort(np.asarray(found))
    keep = [vals[0]]
    for v in vals[1:]:
        if v - keep[-1] > 1e-7:
            keep.append(v)
    return np.array(keep), plateau


def is_admissible_radial(profile, contractible_only=True):
    """``sup |h'| < 1``: every non-constant orbit at level s has minimal period ``1/|h'(s)| > 1``.

    On R^2n every loop is contractible, so ``contractible_only`` has no effect.
    """
    return bool(profile.sup_abs_slope() < 1.0)


def epsilon_truncate(H, eps, delta, tol=1e-9):
    """Upper part ``K = f o H`` of an H in the epsilon-class.

    ``f`` vanishes on ``[0, eps max H]``, has ``0 <= f' <= 1`` and rises to
    ``(1 - eps) max H - delta``, which it keeps from ``max H - 0.9 delta`` on;
    so ``max K`` equals that value exactly.

    Raises
    ------
    InputError
        If eps is not in (0, 1), delta is out of range or H is not in the class.
    """
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise InputError("eps must lie in (0, 1)")
    rep = classify_simple_eps(H, eps, tol=tol)
    top_h = rep.max_value
    delta = float(delta)
    if not 0.0 < delta < (1 - eps) * top_h:
        raise InputError("delta must lie in (0, (1 - eps) max H)")
    top = (1 - eps) * top_h - delta
    f = clamped_ramp(eps * top_h, top, delta / 10.0)
    if isinstance(H, RadialHamiltonian):
        K = RadialHamiltonian(ComposedProfile(f, H.profile), H.dim)
    else:
        K = ComposedHamiltonian(f, H)
    K.truncation = f
    K.max_value = float(f.value(np.array([top_h]))[0])
    return K


def classify_simple_eps(H, eps, tol=1e-9):
    """Membership in the epsilon-class: H >= 0, plateau at max, critical values in [0, eps max] u {max}."""
    rep = classify_simple(H, tol=tol)
    hi = rep.max_value
    s = max(1.0, abs(hi))
    bad = [float(v) for v in rep.critical_values
           if not (-tol * s <= v <= eps * hi + tol * s or abs(v - hi) <= tol * s)]
    ok = rep.min_value >= -tol * s and rep.plateau is not None and not bad and hi > 0
    if not ok:
        raise InputError(f"Hamiltonian is not in the eps-class (offending critical values {bad})")
    return SimplicityReport(True, hi, rep.min_value, rep.critical_values, [], rep.plateau)


def radial(knots, values, slopes=None, dim=2):
    """Shorthand for ``RadialHamiltonian(ProfileFunction(knots, values, slopes), dim)``."""
    return RadialHamiltonian(ProfileFunction(knots, values, slopes), dim)
