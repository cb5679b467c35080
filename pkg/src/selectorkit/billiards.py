"""Shortest periodic billiard trajectories in planar domains.

A closed m-bounce trajectory is a critical point of the polygon length
``L(t_1..t_m) = sum |gamma(t_{i+1}) - gamma(t_i)|`` over boundary
parameters.  Length minimisation alone collapses the polygon to a point,
so the search solves the critical-point equations directly: at each vertex
the unit vectors towards both neighbours must have opposite tangential
components (angle of incidence equals angle of reflection).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from ._validation import check_positive
from .exceptions import ConvergenceError, InputError


class BilliardDomain:
    """Planar domain with a C^1, counter-clockwise boundary ``gamma: R/Z -> R^2``."""

    dim = 2

    def point(self, t):
        raise NotImplementedError

    def deriv(self, t):
        raise NotImplementedError

    def tangent(self, t):
        d = self.deriv(t)
        return d / np.linalg.norm(d, axis=-1, keepdims=True)

    def normal(self, t):
        """Outward unit normal."""
        T = self.tangent(t)
        return np.stack([T[..., 1], -T[..., 0]], axis=-1)

    def area(self, n=4096):
        # trapezoid on a periodic integrand converges spectrally for smooth boundaries
        t = np.arange(n) / n
        P, D = self.point(t), self.deriv(t)
        return float(0.5 * np.mean(P[:, 0] * D[:, 1] - P[:, 1] * D[:, 0]))

    def volume(self):
        return self.area()

    def enclosing_radius(self, n=8192):
        """``max |x|`` over the boundary: U lies in the disc of this radius about 0."""
        return float(np.max(np.linalg.norm(self.point(np.arange(n) / n), axis=1)))

    def diameter(self, n=2048):
        P = self.point(np.arange(n) / n)
        d = 0.0
        for k in range(0, n, 256):
            d = max(d, float(np.max(np.linalg.norm(P[k:k + 256, None, :] - P[None, :, :], axis=2))))
        return d

    def contains(self, X, tol=1e-9):
        raise NotImplementedError

    def scaled(self, lam):
        return ScaledDomain(self, lam)


class Disk(BilliardDomain):
    def __init__(self, r=1.0):
        self.r = check_positive(r, "r")

    def point(self, t):
        a = 2 * np.pi * np.asarray(t, dtype=float)
        return self.r * np.stack([np.cos(a), np.sin(a)], axis=-1)

    def deriv(self, t):
        a = 2 * np.pi * np.asarray(t, dtype=float)
        return 2 * np.pi * self.r * np.stack([-np.sin(a), np.cos(a)], axis=-1)

    def area(self, n=None):
        return float(np.pi * self.r ** 2)

    def enclosing_radius(self, n=None):
        return self.r

    def diameter(self, n=None):
        return 2 * self.r

    def contains(self, X, tol=1e-9):
        return np.linalg.norm(np.atleast_2d(X), axis=1) <= self.r * (1 + tol)

    def scaled(self, lam):
        return Disk(self.r * lam)

    def __repr__(self):
        return f"Disk({self.r:g})"


class Ellipse(BilliardDomain):
    """``(x / a)^2 + (y / b)^2 <= 1`` with semi-axes a and b."""

    def __init__(self, a=2.0, b=1.0):
        self.a = check_positive(a, "a")
        self.b = check_positive(b, "b")

    def point(self, t):
        s = 2 * np.pi * np.asarray(t, dtype=float)
        return np.stack([self.a * np.cos(s), self.b * np.sin(s)], axis=-1)

    def deriv(self, t):
        s = 2 * np.pi * np.asarray(t, dtype=float)
        return 2 * np.pi * np.stack([-self.a * np.sin(s), self.b * np.cos(s)], axis=-1)

    def area(self, n=None):
        return float(np.pi * self.a * self.b)

    def enclosing_radius(self, n=None):
        return max(self.a, self.b)

    def diameter(self, n=None):
        return 2 * max(self.a, self.b)

    def contains(self, X, tol=1e-9):
        X = np.atleast_2d(X)
        return (X[:, 0] / self.a) ** 2 + (X[:, 1] / self.b) ** 2 <= 1 + tol

    def scaled(self, lam):
        return Ellipse(self.a * lam, self.b * lam)

    def __repr__(self):
        return f"Ellipse({self.a:g}, {self.b:g})"


class _Radial(BilliardDomain):
    """Star-shaped domain ``r <= rho(theta)``, parametrised by ``theta = 2 pi t``."""

    def rho(self, th):
        raise NotImplementedError

    def drho(self, th):
        raise NotImplementedError

    def point(self, t):
        th = 2 * np.pi * np.asarray(t, dtype=float)
        return self.rho(th)[..., None] * np.stack([np.cos(th), np.sin(th)], axis=-1)

    def deriv(self, t):
        th = 2 * np.pi * np.asarray(t, dtype=float)
        e = np.stack([np.cos(th), np.sin(th)], axis=-1)
        f = np.stack([-np.sin(th), np.cos(th)], axis=-1)
        return 2 * np.pi * (self.drho(th)[..., None] * e + self.rho(th)[..., None] * f)

    def contains(self, X, tol=1e-9):
        X = np.atleast_2d(X)
        return np.linalg.norm(X, axis=1) <= self.rho(np.arctan2(X[:, 1], X[:, 0])) * (1 + tol)


class SuperEllipse(_Radial):
    """``|x / a|^p + |y / b|^p <= 1``; C^1 for ``p > 1``."""

    def __init__(self, a=1.0, b=1.0, p=4.0):
        self.a = check_positive(a, "a")
        self.b = check_positive(b, "b")
        self.p = float(p)
        if not self.p > 1:
            raise InputError("super-ellipse exponent must exceed 1 for a C^1 boundary")

    def _g(self, th):
        c, s = np.cos(th), np.sin(th)
        return np.abs(c / self.a) ** self.p + np.abs(s / self.b) ** self.p

    def rho(self, th):
        return self._g(th) ** (-1.0 / self.p)

    def drho(self, th):
        c, s, p = np.cos(th), np.sin(th), self.p
        dg = p * (np.abs(c / self.a) ** (p - 1) * np.sign(c) * (-s / self.a)
                  + np.abs(s / self.b) ** (p - 1) * np.sign(s) * (c / self.b))
        return -dg * self._g(th) ** (-1.0 / p - 1) / p

    def scaled(self, lam):
        return SuperEllipse(self.a * lam, self.b * lam, self.p)

    def __repr__(self):
        return f"SuperEllipse({self.a:g}, {self.b:g}, p={self.p:g})"


class StarShaped2D(_Radial):
    """Radial profile from a periodic table ``rho(theta)`` (cubic spline)."""

    def __init__(self, theta, rho):
        from .gauges import StarGauge2D

        self._gauge = StarGauge2D(theta, rho)

    @classmethod
    def from_function(cls, func, n=720):
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return cls(th, func(th))

    def rho(self, th):
        return self._gauge.rho(th)

    def drho(self, th):
        return self._gauge.drho(th)

    def __repr__(self):
        return "StarShaped2D()"


class RoundedSquare(BilliardDomain):
    """Square of side ``side`` centred at 0 with corners rounded to radius ``corner``.

    Parametrised by normalised arc length; the boundary is C^1.
    """

    def __init__(self, side=1.0, corner=0.05):
        self.side = check_positive(side, "side")
        self.corner = check_positive(corner, "corner")
        if not self.corner < self.side / 2:
            raise InputError("corner radius must be below half the side")
        self._flat = self.side - 2 * self.corner
        self._arc = 0.5 * np.pi * self.corner
        self._perim = 4 * (self._flat + self._arc)

    def _local(self, t):
        s = np.mod(np.asarray(t, dtype=float), 1.0) * self._perim
        piece = self._flat + self._arc
        k = np.minimum(np.floor(s / piece), 3).astype(int)
        u = s - k * piece
        return k, u

    def _frame(self, k):
        # side k has outward normal at angle k * pi / 2, starting on the right edge
        ang = k * 0.5 * np.pi
        n = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        T = np.stack([-np.sin(ang), np.cos(ang)], axis=-1)
        return n, T

    def point(self, t):
        k, u = self._local(t)
        n, T = self._frame(k)
        h, c, f = self.side / 2, self.corner, self._flat
        on_flat = u <= f
        flat = h * n + (u - f / 2)[..., None] * T
        phi = np.where(on_flat, 0.0, (u - f) / c)
        centre = (h - c) * n + (f / 2) * T
        arc = centre + c * (np.cos(phi)[..., None] * n + np.sin(phi)[..., None] * T)
        return np.where(on_flat[..., None], flat, arc)

    def deriv(self, t):
        k, u = self._local(t)
        n, T = self._frame(k)
        on_flat = u <= self._flat
        phi = np.where(on_flat, 0.0, (u - self._flat) / self.corner)
        arc = -np.sin(phi)[..., None] * n + np.cos(phi)[..., None] * T
        return self._perim * np.where(on_flat[..., None], T, arc)

    def area(self, n=None):
        return float(self.side ** 2 - (4 - np.pi) * self.corner ** 2)

    def enclosing_radius(self, n=None):
        return float(np.sqrt(2) * (self.side / 2 - self.corner) + self.corner)

    def diameter(self, n=None):
        return 2 * self.enclosing_radius()

    def contains(self, X, tol=1e-9):
        X = np.abs(np.atleast_2d(X))
        h, c = self.side / 2, self.corner
        d = np.maximum(X - (h - c), 0.0)
        inside_box = np.all(X <= h * (1 + tol), axis=1)
        return inside_box & (np.linalg.norm(d, axis=1) <= c * (1 + tol) + tol * h)

    def scaled(self, lam):
        return RoundedSquare(self.side * lam, self.corner * lam)

    def __repr__(self):
        return f"RoundedSquare({self.side:g}, corner={self.corner:g})"


class ScaledDomain(BilliardDomain):
    def __init__(self, base, lam):
        self.base, self.lam = base, check_positive(lam, "lam")

    def point(self, t):
        return self.lam * self.base.point(t)

    def deriv(self, t):
        return self.lam * self.base.deriv(t)

    def contains(self, X, tol=1e-9):
        return self.base.contains(np.atleast_2d(X) / self.lam, tol)

    def area(self, n=4096):
        return self.lam ** 2 * self.base.area()

    def enclosing_radius(self, n=8192):
        return self.lam * self.base.enclosing_radius()


def parse_domain(spec):
    """``disk:r=1``, ``ellipse:a=2,b=1``, ``superellipse:a=1,b=1,p=4``,
    ``square:side=1,corner=0.02`` or ``star:file=rho.csv`` (columns theta, rho)."""
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    try:
        kw = dict(tok.split("=", 1) for tok in rest.split(",") if tok.strip())
        kw = {k.strip(): v.strip() for k, v in kw.items()}
        if kind == "disk":
            return Disk(float(kw.get("r", 1.0)))
        if kind == "ellipse":
            return Ellipse(float(kw.get("a", 2.0)), float(kw.get("b", 1.0)))
        if kind == "superellipse":
            return SuperEllipse(float(kw.get("a", 1.0)), float(kw.get("b", 1.0)), float(kw.get("p", 4.0)))
        if kind == "square":
            return RoundedSquare(float(kw.get("side", 1.0)), float(kw.get("corner", 0.02)))
        if kind == "star":
            data = np.loadtxt(kw["file"], delimiter=",", comments="#", ndmin=2)
            return StarShaped2D(data[:, 0], data[:, 1])
    except (ValueError, KeyError, OSError) as exc:
        raise InputError(f"cannot parse domain spec {spec!r}: {exc}") from exc
    raise InputError(f"unknown domain kind {kind!r}")


# --------------------------------------------------------------------------
# trajectories


@dataclass
class BilliardTrajectory:
    params: np.ndarray
    points: np.ndarray
    segments: np.ndarray
    length: float
    residuals: np.ndarray
    m: int
    info: dict = field(default_factory=dict)

    @property
    def max_residual(self):
        return float(np.max(self.residuals))

    def to_csv(self, path=None, header=""):
        lines = [header.rstrip("\n")] if header else []
        lines.append("i,t,x,y,segment,residual")
        for i in range(self.m):
            x, y = self.points[i]
            lines.append(f"{i},{self.params[i]:.15e},{x:.15e},{y:.15e},{self.segments[i]:.15e},"
                         f"{self.residuals[i]:.3e}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _units(P):
    """Unit vectors from each vertex to its successor and segment lengths (batched)."""
    D = np.roll(P, -1, axis=-2) - P
    L = np.linalg.norm(D, axis=-1)
    return D / np.maximum(L, 1e-300)[..., None], L


def _reflection(U, t):
    """Tangential component of (unit to previous + unit to next) at each vertex."""
    P = U.point(t)
    E, L = _units(P)
    s = np.roll(-E, 1, axis=-2) + E
    return np.einsum("...j,...j->...", s, U.tangent(t)), L


def reflection_residual(traj, U):
    """Per-vertex residual of the reflection law; zero iff the angles agree."""
    return np.abs(_reflection(U, np.asarray(traj.params, dtype=float))[0])


def _segments_inside(U, P, n=16):
    # chords of a non-convex domain may leave it
    s = np.linspace(0.0, 1.0, n + 2)[1:-1]
    Q = np.roll(P, -1, axis=0)
    X = (P[:, None, :] * (1 - s)[None, :, None] + Q[:, None, :] * s[None, :, None]).reshape(-1, 2)
    return bool(np.all(U.contains(X, tol=1e-9)))


def _make(U, t, m, info=None):
    t = np.mod(t, 1.0)
    res, L = _reflection(U, t)
    P = U.point(t)
    return BilliardTrajectory(params=t, points=P, segments=L, length=float(np.sum(L)),
                              residuals=np.abs(res), m=m, info=info or {})


def _jacobian(U, t, h=1e-6):
    """Derivative of the reflection residuals in the boundary parameters, shape (..., m, m)."""
    m = t.shape[-1]
    P, D, T = U.point(t), U.deriv(t), U.tangent(t)
    dT = (U.tangent(t + h) - U.tangent(t - h)) / (2 * h)
    E, L = _units(P)
    # A_i = (I - E_i E_i^T) / L_i, derivative of E_i in its endpoint
    A = (np.eye(2) - E[..., :, None] * E[..., None, :]) / np.maximum(L, 1e-300)[..., None, None]
    Ap = np.roll(A, 1, axis=-3)
    Dn, Dp = np.roll(D, -1, axis=-2), np.roll(D, 1, axis=-2)
    diag = (-np.einsum("...jk,...k,...j->...", A + Ap, D, T)
            + np.einsum("...j,...j->...", E - np.roll(E, 1, axis=-2), dT))
    up = np.einsum("...jk,...k,...j->...", A, Dn, T)
    lo = np.einsum("...jk,...k,...j->...", Ap, Dp, T)
    eye = np.eye(m)
    # cyclic shifts; for m = 2 both neighbours coincide and the terms add
    return (diag[..., :, None] * eye + up[..., :, None] * np.roll(eye, 1, axis=1)
            + lo[..., :, None] * np.roll(eye, -1, axis=1))


def _solve_batch(U, T0, max_iter=80, tol=1e-15):
    """Levenberg-Marquardt on all starts at once (one start per row).

    Vectorising over starts replaces thousands of small solver calls by a
    few dozen array operations.
    """
    t = T0.copy()
    f = _reflection(U, t)[0]
    cost = np.einsum("bi,bi->b", f, f)
    lam = np.full(t.shape[0], 1e-3)
    active = np.ones(t.shape[0], dtype=bool)
    eye = np.eye(t.shape[1])
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        J = _jacobian(U, t[idx])
        JtJ = np.einsum("bki,bkj->bij", J, J)
        g = np.einsum("bki,bk->bi", J, f[idx])
        Dm = np.einsum("bii->bi", JtJ)[:, :, None] * eye + 1e-14 * eye
        step = -np.linalg.solve(JtJ + lam[idx, None, None] * Dm, g[..., None])[..., 0]
        tn = t[idx] + step
        fn = _reflection(U, tn)[0]
        cn = np.einsum("bi,bi->b", fn, fn)
        ok = cn < cost[idx]
        acc = idx[ok]
        t[acc], f[acc], cost[acc] = tn[ok], fn[ok], cn[ok]
        lam[acc] = np.maximum(lam[acc] / 3, 1e-12)
        lam[idx[~ok]] *= 4
        small = np.max(np.abs(step), axis=1) < tol
        active[idx[(cost[idx] < tol ** 2) | small | (lam[idx] > 1e12)]] = False
    return t


def _polish(U, t0, xtol=1e-15):
    sol = least_squares(lambda t: _reflection(U, t)[0], t0, jac=lambda t: _jacobian(U, t),
                        method="lm", xtol=xtol, ftol=xtol, gtol=xtol, max_nfev=50 * t0.size)
    return sol.x


def shortest_periodic(U, m_range=range(2, 9), restarts=64, seed=0, tol=1e-7):
    """Shortest closed billiard trajectory with bounce count in ``m_range``.

    Each start is a random set of boundary parameters; the reflection-law
    equations are solved by a batched Levenberg-Marquardt iteration.  Converged polygons with a
    degenerate segment, a chord leaving U or a residual above ``tol`` are
    discarded.  Ties are broken by bounce count, then by vertices.

    Raises
    ------
    ConvergenceError
        No admissible critical point for any bounce count.
    """
    m_range = sorted({int(m) for m in m_range})
    if not m_range or m_range[0] < 2:
        raise InputError("bounce counts must be >= 2")
    if int(restarts) < 1:
        raise InputError("restarts must be >= 1")
    rng = np.random.default_rng(seed)
    scale = U.diameter()
    best, found, rejected = None, 0, 0
    for m in m_range:
        for t in _solve_batch(U, rng.random((int(restarts), m))):
            traj = _make(U, t, m)
            if (traj.max_residual > tol or traj.segments.min() < 1e-6 * scale
                    or not _segments_inside(U, traj.points)):
                rejected += 1
                continue
            found += 1
            # canonical rotation so ties compare vertices deterministically
            k = int(np.argmin(traj.params))
            traj = _make(U, np.roll(traj.params, -k), m)
            key = (round(traj.length, 10), m, tuple(np.round(traj.params, 10)))
            if best is None or key < best[0]:
                best = (key, traj)
    if best is None:
        raise ConvergenceError(f"no billiard trajectory found for bounce counts {m_range}")
    traj = best[1]
    t = _polish(U, traj.params)
    polished = _make(U, t, traj.m)
    if polished.max_residual <= traj.max_residual and abs(polished.length - traj.length) < 1e-9 * scale:
        traj = polished
    traj.info.update(m_range=(m_range[0], m_range[-1]), restarts=int(restarts), seed=seed,
                     critical_points=found, rejected=rejected)
    return traj


def lift_length_check(traj, f=None, n_nodes=16):
    """Compare length with ``int <p, q'>`` for the lift ``p = f q' / |q'|``.

    ``f`` is None (``f = 1``), a constant or a callable on the global
    parameter ``[0, 1]`` (segments share it in proportion to their length).
    """
    L = np.asarray(traj.segments, dtype=float)
    if np.any(L <= 0):
        raise InputError("trajectory has a zero-length segment")
    total = float(np.sum(L))
    edges = np.concatenate([[0.0], np.cumsum(L)]) / total
    u, w = np.polynomial.legendre.leggauss(n_nodes)
    u, w = 0.5 * (u + 1), 0.5 * w
    lift = 0.0
    fmin = np.inf
    for i in range(L.size):
        s = edges[i] + (edges[i + 1] - edges[i]) * u
        if f is None:
            fv = np.ones_like(s)
        elif callable(f):
            fv = np.asarray(f(s), dtype=float) * np.ones_like(s)
        else:
            fv = float(f) * np.ones_like(s)
        fmin = min(fmin, float(fv.min()))
        # <p, dq> = f |dq| along a straight segment
        lift += L[i] * float(w @ fv)
    return {"length": total, "lift": lift, "gap": lift - total, "f_min": fmin,
            "equality": bool(abs(lift - total) <= 1e-12 * total),
            "inequality": bool(lift >= total * (1 - 1e-12)) if fmin >= 1 else None}


def viterbo_bound_check(U, traj=None, R=None, delta=0.02, dilations=(1.0, 3.0), seed=0,
                        m_range=range(2, 9), restarts=64, certify=True):
    """Check ``l <= e(U x D^n) <= e(B^{2n}(R))`` and the dilation law of ``l / vol^{1/n}``."""
    from .capacities import Ball, displacement_upper

    if traj is None:
        traj = shortest_periodic(U, m_range, restarts, seed)
    if R is None:
        R = float(np.sqrt(U.enclosing_radius() ** 2 + 1.0))
    e = displacement_upper(Ball(R, dim=2 * U.dim), delta, certify=certify)
    n = U.dim
    ratios, lengths = [], []
    for lam in dilations:
        t = traj if lam == 1.0 else shortest_periodic(U.scaled(lam), m_range, restarts, seed)
        lengths.append((float(lam), t.length))
        ratios.append(t.length / U.scaled(lam).volume() ** (1.0 / n) if lam != 1.0
                      else t.length / U.volume() ** (1.0 / n))
    ratios = np.array(ratios)
    equiv = max(abs(l - lam * traj.length) for lam, l in lengths)
    return {"length": traj.length, "R": R, "ball_bound": float(np.pi * R * R), "e_upper": e.upper,
            "slack": e.upper - traj.length, "bound_ok": bool(traj.length <= np.pi * R * R + delta
                                                            and traj.length <= e.upper),
            "ratios": ratios.tolist(), "ratio_spread": float(np.ptp(ratios)),
            "lengths": lengths, "dilation_error": float(equiv),
            "ok": bool(traj.length <= e.upper and equiv <= 1e-9 * max(1.0, traj.length * max(dilations)))}


def to_svg(U, traj, path=None, size=400, n=720):
    """SVG drawing of the boundary and the trajectory polygon."""
    B = U.point(np.arange(n) / n)
    P = np.vstack([traj.points, traj.points[:1]])
    r = 1.1 * float(np.max(np.abs(B)))
    k = size / (2 * r)

    def path_d(X, close):
        pts = [f"{(x + r) * k:.3f},{(r - y) * k:.3f}" for x, y in X]
        return "M" + " L".join(pts) + (" Z" if close else "")

    text = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">\n'
            f'<path d="{path_d(B, True)}" fill="none" stroke="black"/>\n'
            f'<path d="{path_d(P, False)}" fill="none" stroke="red"/>\n</svg>\n')
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
