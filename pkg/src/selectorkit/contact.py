"""Star-shaped hypersurfaces ``S = {F = 1}``: Reeb dynamics, alpha_1 and thickenings.

With the radial Liouville field ``X = x / 2`` and ``lambda = i_X omega0``,
Euler's identity ``<grad F, x> = 2F`` gives ``lambda(J0 grad F) = F``, so
the Reeb field on S is ``R = J0 grad F`` and ``lambda(R) = 1``.  Closed
Reeb orbits therefore have action equal to their period.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from ._validation import check_points, check_positive
from .exceptions import AmbiguousBranch, InputError
from .flows import DEFAULT_ATOL, DEFAULT_RTOL, apply_j, flow_map, omega0
from .gauges import EllipsoidGauge, ScaledGauge, _sphere_grid
from .hamiltonians import Hamiltonian, RadialHamiltonian, ShellHamiltonian
from .profiles import PiecewiseCubic, ProfileFunction


class GaugeHamiltonian(Hamiltonian):
    """``F`` itself as an (unbounded) autonomous Hamiltonian; its flow preserves S."""

    autonomous = True

    def __init__(self, gauge):
        self.gauge = gauge
        self.dim = gauge.dim

    def _value(self, t, X):
        return self.gauge.value(X)

    def _gradient(self, t, X):
        return self.gauge.gradient(X)

    def _hessian(self, t, X):
        return self.gauge.hessian(X)

    def closed_flow(self, t0, t1, X, jac=False):
        # ellipsoids: each (q_i, p_i) plane rotates with period a_i
        if not isinstance(self.gauge, EllipsoidGauge):
            return None
        n = self.dim // 2
        th = 2 * np.pi * (t1 - t0) / self.gauge.a
        c, s = np.cos(th), np.sin(th)
        M = np.zeros((self.dim, self.dim))
        i = np.arange(n)
        M[i, i], M[i, i + n], M[i + n, i], M[i + n, i + n] = c, -s, s, c
        Y = X @ M.T
        return (Y, np.broadcast_to(M, (X.shape[0],) + M.shape).copy()) if jac else Y


class Hypersurface:
    """``S = {F = 1}`` for a 2-homogeneous gauge F."""

    def __init__(self, gauge, name=""):
        self.gauge = gauge
        self.dim = gauge.dim
        self.name = name or repr(gauge)
        self._flow = GaugeHamiltonian(gauge)

    # structure -----------------------------------------------------------
    @staticmethod
    def liouville(X):
        return 0.5 * np.atleast_2d(X)

    def contact_form(self, X, V):
        """``lambda_x(v) = omega0(x / 2, v)``."""
        return omega0(self.liouville(X), V)

    def transversality(self, n=2048, seed=0):
        """Minimum of ``dF(X) / (|grad F| |X|)`` on a sphere-grid sample of S."""
        P = self.points(n, seed)
        G = self.gauge.gradient(P)
        dFX = np.einsum("ij,ij->i", G, self.liouville(P))
        return float(np.min(dFX / (np.linalg.norm(G, axis=1) * np.linalg.norm(self.liouville(P), axis=1))))

    def points(self, n=256, seed=0, include_axes=True):
        """Seed grid on S: radial projection of coordinate axes and sphere samples."""
        U = _sphere_grid(self.dim, n, seed)
        if include_axes:
            U = np.vstack([np.eye(self.dim), U])
        return self.gauge.project(U)

    def tangent_basis(self, x):
        """Orthonormal basis of ``T_x S`` (rows)."""
        g = self.gauge.gradient(x[None, :])[0]
        _, _, Vt = np.linalg.svd(g[None, :])
        return Vt[1:]

    def diameter(self, n=4096, seed=0):
        P = self.points(n, seed)
        return float(2 * np.max(np.linalg.norm(P, axis=1)))

    def scaled(self, c):
        """``sqrt(c) S``."""
        g = self.gauge.scaled(c)
        return Hypersurface(g, name=f"{self.name}*{c:g}")


def ellipsoid_surface(a):
    return Hypersurface(EllipsoidGauge(a), name="ellipsoid:a=" + ",".join(f"{v:g}" for v in np.atleast_1d(a)))


def round_sphere(r=1.0, dim=4):
    return Hypersurface(EllipsoidGauge(np.full(dim // 2, np.pi * r * r)), name=f"sphere:r={r:g},dim={dim}")


def parse_surface(spec):
    """``ellipsoid:a=1,2``, ``sphere:r=1,dim=4`` or ``star:file=gauge.csv`` (planar)."""
    from .capacities import parse_body

    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "sphere":
            kw = dict(tok.split("=") for tok in rest.split(",") if tok)
            return round_sphere(float(kw.get("r", 1.0)), int(kw.get("dim", 4)))
        if kind in ("ellipsoid", "star"):
            body = parse_body(spec)
            return Hypersurface(body.gauge, name=spec)
    except (ValueError, KeyError) as exc:
        raise InputError(f"cannot parse surface spec {spec!r}: {exc}") from exc
    raise InputError(f"unknown surface kind {kind!r}")


def reeb_field(S, X, tol=1e-8):
    """Reeb vector field ``R = J0 grad F / lambda(J0 grad F)`` at points of S.

    Raises
    ------
    InputError
        If a point is off S by more than ``tol`` or ``grad F`` is near zero.
    """
    X, single = check_points(X, S.dim)
    F = S.gauge.value(X)
    if np.any(np.abs(F - 1.0) > tol):
        raise InputError(f"points are not on S (|F - 1| up to {np.max(np.abs(F - 1)):.3g})")
    G = S.gauge.gradient(X)
    if np.any(np.linalg.norm(G, axis=1) < 1e-12):
        raise InputError("gauge gradient vanishes")
    V = apply_j(G)
    R = V / S.contact_form(X, V)[:, None]
    return R[0] if single else R


@dataclass
class ReebOrbit:
    x0: np.ndarray
    period: float
    action: float
    residual: float
    samples: np.ndarray
    tangent_residual: float
    covers: int = 1
    contractible: bool = True
    info: dict = field(default_factory=dict)

    def to_csv(self, path=None, header=""):
        lines = [header.rstrip("\n")] if header else []
        d = self.samples.shape[1]
        n = d // 2
        lines.append(",".join([f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]))
        lines += [",".join(f"{v:.12e}" for v in row) for row in self.samples]
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1), 0.5 * w


def _orbit_data(S, x0, T, n_nodes=256, rtol=1e-13, atol=1e-13):
    """Samples, action by Gauss-Legendre quadrature of ``lambda(x')`` and tangency residual."""
    panels = 8
    u, w = _gl(n_nodes // panels)
    t = np.concatenate([(k + u) / panels for k in range(panels)]) * T
    wt = np.concatenate([w / panels for _ in range(panels)]) * T
    sol = solve_ivp(lambda _, y: S._flow._vector_field(0.0, y[None, :])[0], (0.0, T), x0,
                    method="DOP853", rtol=rtol, atol=atol, t_eval=t)
    X = sol.y.T
    V = S._flow._vector_field(0.0, X)
    action = float(np.sum(wt * S.contact_form(X, V)))
    # the velocity must lie in the characteristic line: compare with its projection on R
    R = apply_j(S.gauge.gradient(X))
    R = R / S.contact_form(X, R)[:, None]
    lam = S.contact_form(X, V)
    tang = float(np.max(np.linalg.norm(V - lam[:, None] * R, axis=1) / np.linalg.norm(V, axis=1)))
    return X, action, tang


def _refine(S, x_seed, T, tol=1e-12, max_iter=30):
    """Newton on ``(x, T)``: ``phi_T(x) = x``, ``F(x) = 1``, section through the seed."""
    H = S._flow
    x = S.gauge.project(x_seed[None, :])[0]
    r0 = reeb_field(S, x[None, :], tol=1e-6)[0]
    d = S.dim
    res = np.inf
    for _ in range(max_iter):
        y, M = flow_map(H, x[None, :], 0.0, T, jac=True, rtol=1e-13, atol=1e-13)
        y, M = y[0], M[0]
        fx = H._vector_field(0.0, y[None, :])[0]
        r = np.concatenate([y - x, [S.gauge.value(x[None, :])[0] - 1.0, r0 @ (x - x_seed)]])
        res = float(np.linalg.norm(r))
        if res < tol:
            break
        A = np.zeros((d + 2, d + 1))
        A[:d, :d] = M - np.eye(d)
        A[:d, d] = fx
        A[d, :d] = S.gauge.gradient(x[None, :])[0]
        A[d + 1, :d] = r0
        step = np.linalg.lstsq(A, -r, rcond=1e-12)[0]
        x = x + step[:d]
        T = T + step[d]
        if T <= 0:
            return None
    return x, T, res


def _returns(S, x0, T_max, radius):
    """Times where the orbit of x0 re-crosses the section ``<x - x0, R(x0)> = 0`` near x0."""
    r0 = reeb_field(S, x0[None, :], tol=1e-6)[0]

    def section(t, y):
        return float(r0 @ (y - x0))

    section.direction = 1.0
    sol = solve_ivp(lambda _, y: S._flow._vector_field(0.0, y[None, :])[0], (0.0, T_max), x0,
                    method="DOP853", rtol=1e-11, atol=1e-12, events=section)
    out = []
    for te, ye in zip(sol.t_events[0], sol.y_events[0]):
        if te > 1e-6 * T_max and np.linalg.norm(ye - x0) < radius:
            out.append(float(te))
    return out


def _orbit_distance(S, orbit, x):
    """Distance from x to the orbit: nearest sample, then one linearized flow correction."""
    X = orbit.samples
    j = int(np.argmin(np.linalg.norm(X - x, axis=1)))
    v = S._flow._vector_field(0.0, X[j:j + 1])[0]
    dt = float((x - X[j]) @ v / (v @ v))
    if dt == 0.0:
        return float(np.linalg.norm(X[j] - x))
    y = flow_map(S._flow, X[j:j + 1], 0.0, dt)[0]
    return float(np.linalg.norm(y - x))


def _on_orbit(S, orbit, x, tol):
    if np.min(np.linalg.norm(orbit.samples - x, axis=1)) > 0.1 * orbit.period * _speed(S, orbit):
        return False
    return _orbit_distance(S, orbit, x) < tol


def _speed(S, orbit):
    return float(np.max(np.linalg.norm(S._flow._vector_field(0.0, orbit.samples[:4]), axis=1)))


def closed_characteristics(S, T_max, seeds=None, n_seeds=24, seed=0, return_radius=0.05, tol=1e-10):
    """Closed Reeb orbits on S with period at most ``T_max``.

    Seeds are integrated until ``T_max``; every near-return to the Poincare
    section through the seed is Newton-refined in ``(x, T)``.  Orbits are
    merged when their periods agree and one passes through the other's
    start point; iterates of a shorter orbit are kept with ``covers > 1``.
    Returns an empty list when nothing closes up before ``T_max``.
    """
    T_max = check_positive(T_max, "T_max")
    if seeds is None:
        seeds = S.points(n_seeds, seed)
    seeds = S.gauge.project(np.atleast_2d(seeds))
    scale = float(np.max(np.linalg.norm(seeds, axis=1)))
    close = 1e-6 * scale
    found = []
    for x0 in seeds:
        if any(_on_orbit(S, o, x0, close) for o in found if o.covers == 1):
            continue
        prime = None
        for te in _returns(S, x0, T_max, return_radius * scale):
            if prime is not None:
                k = te / prime.period
                if abs(k - round(k)) < 1e-6 and round(k) >= 2:
                    # iterate of the orbit already found from this seed
                    k = int(round(k))
                    found.append(ReebOrbit(x0=prime.x0, period=k * prime.period, action=k * prime.action,
                                           residual=prime.residual, samples=prime.samples,
                                           tangent_residual=prime.tangent_residual, covers=k))
                    continue
            out = _refine(S, x0, te)
            if out is None:
                continue
            x, T, res = out
            if res > 1e-8 or T > T_max * (1 + 1e-9):
                continue
            if any(abs(o.period - T) <= 1e-7 * max(1.0, T) and _on_orbit(S, o, x, close) for o in found):
                continue
            X, action, tang = _orbit_data(S, x, T)
            orb = ReebOrbit(x0=x, period=T, action=action, residual=res, samples=X, tangent_residual=tang)
            for p in found:
                k = T / p.period
                if p.covers == 1 and abs(k - round(k)) < 1e-6 and round(k) >= 2 and _on_orbit(S, p, x, close):
                    orb.covers = int(round(k))
                    break
            found.append(orb)
            if prime is None and orb.covers == 1:
                prime = orb
    # iterates may duplicate each other when several seeds hit the same prime orbit
    uniq = []
    for o in sorted(found, key=lambda o: (o.period, tuple(np.round(o.x0, 9)))):
        if any(abs(u.period - o.period) <= 1e-7 * max(1.0, o.period) and _on_orbit(S, u, o.x0, close)
               for u in uniq):
            continue
        uniq.append(o)
    return uniq


@dataclass
class AlphaOne:
    value: float
    witness: object
    n_orbits: int
    floor: float
    complete: bool = False

    @property
    def known(self):
        return self.witness is not None


def alpha_one(S, T_max, **kw):
    """Smallest action over the closed characteristics found up to ``T_max``.

    With nothing found the value is ``nan`` and only ``floor = T_max`` is
    known (``alpha_1 >= T_max`` is *not* implied; the search may miss orbits).
    """
    orbits = closed_characteristics(S, T_max, **kw)
    if not orbits:
        return AlphaOne(float("nan"), None, 0, float(T_max))
    best = min(orbits, key=lambda o: abs(o.action))
    return AlphaOne(abs(best.action), best, len(orbits), float(T_max))


def thicken(S, t):
    """Thickening ``S_t = phi_X^{ln(1+t)}(S) = sqrt(1 + t) S`` and the collar map."""
    t = float(t)
    if t <= -1:
        raise InputError("thickening parameter must exceed -1")
    fac = np.sqrt(1 + t)
    return S.scaled(1 + t), (lambda X: fac * np.asarray(X, dtype=float))


def conformality_check(S, ts=(0.0, 0.1, 0.2), T_max=None, **kw):
    """``alpha_1(S_t) = (1 + t) alpha_1(S)`` on a grid of t, with a linear fit."""
    base = alpha_one(S, T_max, **kw)
    rows = []
    for t in ts:
        St, _ = thicken(S, t)
        a = alpha_one(St, T_max * (1 + max(t, 0.0)), **kw)
        rows.append((float(t), a.value, (1 + t) * base.value, abs(a.value - (1 + t) * base.value)))
    x = np.array([1 + r[0] for r in rows])
    y = np.array([r[1] for r in rows])
    slope, icpt = np.polyfit(x, y, 1) if len(rows) > 1 else (y[0] / x[0], 0.0)
    fit_res = float(np.max(np.abs(slope * x + icpt - y))) if len(rows) > 1 else 0.0
    worst = max(r[3] for r in rows)
    return {"alpha_1": base.value, "rows": rows, "slope": float(slope), "intercept": float(icpt),
            "fit_residual": fit_res, "max_residual": worst, "ok": bool(worst <= 1e-6)}


# --------------------------------------------------------------------------
# plateau Hamiltonian


def plateau_function(tau, C):
    """``f`` = 0 off ``(-tau/2, tau/2)``, = C on ``[-tau/4, tau/4]``, strictly monotone between."""
    tau, C = check_positive(tau, "tau"), check_positive(C, "C")
    return PiecewiseCubic([-tau / 2, -tau / 4, tau / 4, tau / 2], [0.0, C, C, 0.0], [0.0, 0.0, 0.0, 0.0])


def plateau_hamiltonian(S, tau, C):
    """``H = f(t)`` on ``S_t = {F = 1 + t}`` and 0 elsewhere.

    For a round sphere the result is a :class:`RadialHamiltonian` (exact
    flow and spectrum oracle), otherwise a :class:`ShellHamiltonian`.
    """
    f = plateau_function(tau, C)
    g = S.gauge
    if isinstance(g, EllipsoidGauge) and np.allclose(g.a, g.a[0], rtol=0, atol=0):
        # F = pi |z|^2 / a, so H = h(pi |z|^2) with h(s) = f(s / a - 1)
        a = float(g.a[0])
        knots = [0.0] + [a * (1 + k) for k in f.knots]
        prof = ProfileFunction(knots, [0.0, 0.0, C, C, 0.0], [0.0] * 5)
        H = RadialHamiltonian(prof, S.dim)
        H.gauge_scale = a
    else:
        H = ShellHamiltonian(g, f)
    H.plateau = f
    H.plateau_C = C
    H.plateau_tau = tau
    return H


def shell_orbit_levels(f, periods, k_max=3):
    """Levels ``eps`` with ``f'(eps) = +-k T`` for Reeb periods T on S: the 1-periodic
    orbits of the plateau Hamiltonian (on ``S_eps`` the flow is ``f'(eps)`` times
    ``(1 + eps)`` times the Reeb flow of ``S_eps``, whose periods are ``(1 + eps) T``).
    """
    out = []
    for T in periods:
        for k in range(1, k_max + 1):
            for sgn in (1, -1):
                roots, _ = f.derivative_roots(sgn * k * T)
                for eps, _ in roots:
                    out.append((float(eps), sgn * k, float(T)))
    return sorted(out)


def verify_reeb_bound(S, delta=0.02, tau=None, C=None, e_upper=None, alpha=None, T_max=None,
                             widths=(0.08, 0.04, 0.02)):
    """``alpha_1(S) <= c_sigma_hat(S) <= e(S)`` on a round sphere, with the plateau witness.

    The selector runs on the plateau Hamiltonian with the displacement bound
    of the sphere's ball; its value must lie in ``(0, C)`` and be the
    action of a non-constant orbit on some ``S_eps`` with ``0 < f(eps) < C``.
    """
    from .capacities import Ball, certify_shear, displacement_upper, shear_displacer
    from .selector import select
    from .spectrum import radial_spectrum_oracle

    g = S.gauge
    if not (isinstance(g, EllipsoidGauge) and np.allclose(g.a, g.a[0])):
        raise InputError("the plateau witness is implemented for round spheres")
    a = float(g.a[0])
    r = np.sqrt(a / np.pi)
    if alpha is None:
        alpha = alpha_one(S, T_max or 1.5 * a)
    e_est = e_upper if e_upper is not None else displacement_upper(Ball(r, S.dim), delta)
    K = e_est.witness
    if tau is None:
        # widest shell the ball's displacer still moves off itself (its chord slack is eta)
        tau = 1.6 * (delta / (4 * np.pi)) / r ** 2
    # the displacer of the ball also displaces the closed shell neighbourhood of width tau
    r_shell = r * np.sqrt(1 + tau / 2)
    ok_shell, info_shell = certify_shear(K, r_shell)
    hat_upper = K.norm if ok_shell else np.inf
    # width extrapolation of e-upper over shrinking shells
    series = []
    for w in widths:
        rw = r * np.sqrt(1 + w / 2)
        series.append((w, shear_displacer(rw, delta, dim=S.dim).norm))
    ws, vs = np.array(series).T
    extrap = float(np.polyfit(ws, vs, 1)[1])
    if C is None:
        C = hat_upper + 0.03
    H = plateau_hamiltonian(S, tau, C)
    report = {"alpha_1": alpha.value, "e_upper": e_est.upper, "c_sigma_hat_upper": hat_upper,
              "c_sigma_hat_extrapolated": extrap, "width_series": series, "C": C, "tau": tau,
              "rationality": "rho = inf on R^2n (hypothesis holds vacuously)",
              "diameter_bound": np.pi * S.diameter() ** 2, "shell_certified": ok_shell}
    try:
        sigma, trace = select(H, displacement_bound=K.norm)
    except AmbiguousBranch as exc:
        report.update(status="inconclusive", sigma=float("nan"), interval=exc.interval)
        return report
    spec = radial_spectrum_oracle(H.profile)
    entry = spec.nearest(sigma)
    eps = entry.level / a - 1 if entry.level is not None else float("nan")
    f_eps = float(H.plateau.value(np.array([eps]))[0]) if np.isfinite(eps) else float("nan")
    capping = abs(sigma - f_eps)
    checks = {
        "sigma_in_(0,C)": 0.0 < sigma < C,
        "witness_nonconstant": entry.kind != "constant" and entry.winding != 0,
        "0<f(eps)<C": 0.0 < f_eps < C,
        "alpha_le_hat": alpha.value <= hat_upper + 1e-9,
        "hat_le_e": hat_upper <= e_est.upper + 1e-9,
        "capping_le_hat_plus_delta": capping <= hat_upper + delta,
        "alpha_le_diameter_bound": alpha.value <= report["diameter_bound"],
    }
    report.update(sigma=sigma, eps=eps, f_eps=f_eps, winding=entry.winding, capping_action=capping,
                  checks=checks, status="pass" if all(checks.values()) else "fail", trace=trace)
    return report


def spectrum_positivity_check(S, T_max, floor=None, **kw):
    """All found actions are positive and the action set is closed at search scale.

    Actions are clustered (tol 1e-6); each cluster must be tight (spread
    below 1e-8 relative) so no sequence of distinct values accumulates.
    """
    orbits = closed_characteristics(S, T_max, **kw)
    acts = np.sort(np.array([o.action for o in orbits]))
    if acts.size == 0:
        return {"n_orbits": 0, "ok": True, "min_action": float("nan"), "clusters": []}
    clusters = [[acts[0]]]
    for v in acts[1:]:
        if v - clusters[-1][-1] <= 1e-6 * max(1.0, v):
            clusters[-1].append(v)
        else:
            clusters.append([v])
    tight = all(max(c) - min(c) <= 1e-8 * max(1.0, max(c)) for c in clusters)
    fl = floor if floor is not None else 0.0
    mn = float(acts.min())
    period_ok = all(abs(o.action - o.period) <= 1e-8 * max(1.0, o.period) for o in orbits)
    return {"n_orbits": len(orbits), "min_action": mn, "clusters": [float(np.mean(c)) for c in clusters],
            "tight": tight, "action_equals_period": period_ok, "ok": bool(mn > fl and tight and mn > 0)}
