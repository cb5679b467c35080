"""Positively 2-homogeneous gauges ``F`` with ``S = {F = 1}`` star-shaped.

A gauge carries ``value``, ``gradient`` and ``hessian`` on stacked points
of shape (N, 2n), plus ``max_radius(c)`` (largest ``|x|`` on ``{F = c}``)
and ``min_radius(c)``.  Homogeneity gives ``{F = c} = sqrt(c) S``.
"""

import numpy as np
from scipy.interpolate import CubicSpline

from ._validation import check_dimension, check_points
from .exceptions import InputError


class Gauge:
    dim = 2

    def value(self, X):
        raise NotImplementedError

    def gradient(self, X):
        raise NotImplementedError

    def hessian(self, X):
        # central differences of the gradient
        X, _ = check_points(X, self.dim)
        N, d = X.shape
        h = 1e-6 * (1.0 + np.abs(X))
        out = np.empty((N, d, d))
        for j in range(d):
            E = np.zeros_like(X)
            E[:, j] = h[:, j]
            out[:, :, j] = (self.gradient(X + E) - self.gradient(X - E)) / (2 * h[:, j:j + 1])
        return 0.5 * (out + np.transpose(out, (0, 2, 1)))

    def radial_function(self, U):
        """``rho(u)`` with ``rho(u) u`` on S, for unit vectors ``U``."""
        return 1.0 / np.sqrt(self.value(U))

    def max_radius(self, c=1.0):
        return float(np.sqrt(c) * self._extreme_radius(max))

    def min_radius(self, c=1.0):
        return float(np.sqrt(c) * self._extreme_radius(min))

    def _extreme_radius(self, which):
        U = _sphere_grid(self.dim, 4096, seed=0)
        return which(self.radial_function(U))

    def scaled(self, c):
        """Gauge of ``sqrt(c) S``."""
        return ScaledGauge(self, c)

    def project(self, X, level=1.0):
        """Radial projection onto ``{F = level}``."""
        X, _ = check_points(X, self.dim)
        return X * np.sqrt(level / self.value(X))[:, None]


class EllipsoidGauge(Gauge):
    """``F(z) = sum_i pi |z_i|^2 / a_i``; ``{F < 1}`` is the ellipsoid E(a)."""

    def __init__(self, a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if a.ndim != 1 or np.any(~np.isfinite(a)) or np.any(a <= 0):
            raise InputError("ellipsoid parameters must be positive")
        self.a = a
        self.dim = 2 * a.size
        self._w = np.concatenate([np.pi / a, np.pi / a])

    def value(self, X):
        X = np.atleast_2d(X)
        return X * X @ self._w

    def gradient(self, X):
        return 2 * np.atleast_2d(X) * self._w

    def hessian(self, X):
        X = np.atleast_2d(X)
        return np.broadcast_to(np.diag(2 * self._w), (X.shape[0], self.dim, self.dim)).copy()

    def radial_function(self, U):
        return 1.0 / np.sqrt(self.value(U))

    def max_radius(self, c=1.0):
        return float(np.sqrt(c * self.a.max() / np.pi))

    def min_radius(self, c=1.0):
        return float(np.sqrt(c * self.a.min() / np.pi))

    def scaled(self, c):
        return EllipsoidGauge(self.a * c)

    def __repr__(self):
        return f"EllipsoidGauge({self.a.tolist()})"


def round_gauge(r=1.0, dim=2):
    """Gauge of the sphere of radius r: ``E(pi r^2, ..., pi r^2)``."""
    n = check_dimension(dim) // 2
    return EllipsoidGauge(np.full(n, np.pi * r * r))


class ScaledGauge(Gauge):
    """``F / c``, the gauge of ``sqrt(c) S``."""

    def __init__(self, base, c):
        if not c > 0:
            raise InputError("scale factor must be positive")
        self.base, self.c = base, float(c)
        self.dim = base.dim

    def value(self, X):
        return self.base.value(X) / self.c

    def gradient(self, X):
        return self.base.gradient(X) / self.c

    def hessian(self, X):
        return self.base.hessian(X) / self.c

    def max_radius(self, c=1.0):
        return self.base.max_radius(c * self.c)

    def min_radius(self, c=1.0):
        return self.base.min_radius(c * self.c)


class StarGauge2D(Gauge):
    """Planar star-shaped curve ``r = rho(theta)`` from a periodic table.

    ``F(x) = |x|^2 / rho(theta)^2`` with ``rho`` a periodic cubic spline.
    """

    dim = 2

    def __init__(self, theta, rho):
        theta = np.asarray(theta, dtype=float)
        rho = np.asarray(rho, dtype=float)
        if theta.ndim != 1 or theta.shape != rho.shape or theta.size < 4:
            raise InputError("need matching 1-d theta/rho tables with at least 4 rows")
        if np.any(rho <= 0) or np.any(np.diff(theta) <= 0):
            raise InputError("rho must be positive and theta increasing")
        if theta[-1] - theta[0] >= 2 * np.pi - 1e-12:
            theta, rho = theta[:-1], rho[:-1]
        t = np.append(theta, theta[0] + 2 * np.pi)
        r = np.append(rho, rho[0])
        self._spline = CubicSpline(t, r, bc_type="periodic")
        self._t0 = theta[0]

    @classmethod
    def from_function(cls, func, n=720):
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return cls(th, func(th))

    def rho(self, theta):
        return self._spline(np.mod(theta - self._t0, 2 * np.pi) + self._t0)

    def drho(self, theta):
        return self._spline(np.mod(theta - self._t0, 2 * np.pi) + self._t0, 1)

    def value(self, X):
        X = np.atleast_2d(X)
        th = np.arctan2(X[:, 1], X[:, 0])
        return np.einsum("ij,ij->i", X, X) / self.rho(th) ** 2

    def gradient(self, X):
        X = np.atleast_2d(X)
        r2 = np.einsum("ij,ij->i", X, X)
        th = np.arctan2(X[:, 1], X[:, 0])
        rho, drho = self.rho(th), self.drho(th)
        er = np.stack([np.cos(th), np.sin(th)], axis=1)
        et = np.stack([-np.sin(th), np.cos(th)], axis=1)
        r = np.sqrt(r2)
        return (2 * r / rho ** 2)[:, None] * er + (-2 * r * drho / rho ** 3)[:, None] * et

    def radial_function(self, U):
        return self.rho(np.arctan2(U[:, 1], U[:, 0]))

    def _extreme_radius(self, which):
        th = np.linspace(0.0, 2 * np.pi, 20000, endpoint=False)
        return which(self.rho(th))


def _sphere_grid(dim, n, seed=0):
    if dim == 2:
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((n, dim))
    return U / np.linalg.norm(U, axis=1, keepdims=True)
