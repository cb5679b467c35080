"""Contractible 1-periodic orbits and the action spectrum.

The search has two stages.  Shooting runs a damped Gauss-Newton iteration
on ``x -> phi_H^1(x) - x`` for a whole seed cloud at once, using the
linearized flow as Jacobian and least squares so that circle families
(where ``dphi - id`` is singular) do not stall it.  For autonomous H each
distinct orbit is then refined spectrally: Newton on the H^{1/2} gradient
of the action in Fourier coefficients.

For radial profiles the spectrum is known in closed form: an orbit at
level ``s = pi |x|^2`` is 1-periodic iff ``h'(s) = k`` is an integer
(counterclockwise winding k), with action ``h(s) - k s``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator

from ._validation import check_random_state
from .exceptions import ConvergenceError
from .flows import _integrate_stack, flow_map, monodromy_report
from .hamiltonians import RadialHamiltonian, SharpHamiltonian
from .profiles import PiecewiseCubic
from .loops import FourierLoop, action as loop_action, gauss_nodes, h12_weights, l2_modes, quadrature_action

CLUSTER_TOL = 1e-7


@dataclass
class PeriodicOrbit:
    """A located 1-periodic orbit.

    Attributes
    ----------
    x0 : ndarray
        Point on the orbit at t = 0.
    loop : FourierLoop
    action : float
    constant : bool
    winding : int or None
        Counterclockwise winding (``h'(s)`` for radial orbits, otherwise the
        dominant Fourier mode with reversed sign).
    shoot_residual, loop_residual : float
    monodromy : MonodromyMatrix or None
    slope : float
        ``int_0^1 H(t, x(t)) dt``: derivative of the action of the
        corresponding orbit of ``tau H`` with respect to tau.
    level : float or None
        ``pi |x0|^2``.
    count : int
        Number of seeds that converged to this orbit.
    """

    x0: np.ndarray
    loop: FourierLoop
    action: float
    constant: bool
    winding: object = None
    shoot_residual: float = 0.0
    loop_residual: float = 0.0
    monodromy: object = None
    slope: float = 0.0
    level: object = None
    count: int = 1
    action_fourier: float = float("nan")

    @property
    def degenerate(self):
        if self.monodromy is None:
            return True
        # autonomous non-constant orbits always carry one eigenvalue-1 direction
        allowed = 0 if self.constant else 1
        return self.monodromy.nullity > allowed


@dataclass
class SpectrumEntry:
    """One spectral value; ``interval`` is set for degenerate bands (``s`` range)."""

    value: float
    multiplicity: int = 1
    winding: object = None
    kind: str = "orbit"
    degenerate: bool = False
    residual: float = 0.0
    slope: float = 0.0
    level: object = None
    interval: object = None
    orbit: object = None


@dataclass
class ActionSpectrum:
    """Sorted spectral values separated by more than ``tol``."""

    entries: list = field(default_factory=list)
    tol: float = CLUSTER_TOL
    complete: bool = False

    @property
    def values(self):
        return np.array([e.value for e in self.entries])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def contains(self, v, tol=1e-6):
        vals = self.values
        return bool(vals.size and np.min(np.abs(vals - v)) <= tol)

    def nearest(self, v):
        vals = self.values
        return self.entries[int(np.argmin(np.abs(vals - v)))]

    def to_csv(self, path=None, header=""):
        lines = [header.rstrip("\n")] if header else []
        lines.append("action,multiplicity,winding,kind,degenerate_flag,residual,slope")
        for e in self.entries:
            w = "" if e.winding is None else str(int(e.winding))
            lines.append(f"{e.value:.12e},{e.multiplicity},{w},{e.kind},{int(bool(e.degenerate))},"
                         f"{e.residual:.3e},{e.slope:.12e}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def cluster_entries(entries, tol=CLUSTER_TOL):
    """Merge entries whose values differ by at most ``tol``.

    Within a cluster the representative keeps the smallest winding and
    non-degenerate data wins; multiplicities add up.
    """
    entries = sorted(entries, key=lambda e: (e.value, -1 if e.winding is None else abs(e.winding)))
    out = []
    for e in entries:
        if out and abs(e.value - out[-1].value) <= tol:
            last = out[-1]
            last.multiplicity += e.multiplicity
            last.degenerate = last.degenerate and e.degenerate
            if last.kind != e.kind and "constant" in (last.kind, e.kind):
                last.kind = "constant"
            continue
        out.append(SpectrumEntry(**vars(e)))
    return out


# --------------------------------------------------------------------------
# radial oracle


def _active_start(profile):
    """Smallest s where the profile stops being constant (0 if unknown)."""
    if not isinstance(profile, PiecewiseCubic):
        return 0.0
    for a, b, c3, c2, c1, c0 in profile._pieces():
        if max(abs(c3), abs(c2), abs(c1)) > 0.0:
            return float(a)
    return float(profile.knots[-1])


def radial_spectrum_oracle(profile, tau=1.0, tol=CLUSTER_TOL, window=None):
    """Closed-form spectrum of ``tau * h(pi |x|^2)``.

    Non-constant orbits sit where ``tau h'(s) = k`` for a nonzero integer k;
    their action is ``tau h(s) - k s`` and its tau-derivative is ``h(s)``.
    Constant orbits contribute ``tau h(0)``, 0 and ``tau h`` at zeros of h'.
    Bands where ``h'`` is constant produce one value, flagged with the
    s-interval; tangential roots (``h'' = 0``) are flagged degenerate.
    ``window = (lo, hi)`` skips winding numbers whose orbits cannot have
    an action in that range (constant orbits are always kept).
    """
    tau = float(tau)
    entries = []

    def hv(s):
        return float(profile.value(np.array([s]))[0])

    entries.append(SpectrumEntry(0.0, kind="constant", slope=0.0, level=profile.s_max, winding=0))
    entries.append(SpectrumEntry(tau * hv(0.0), kind="constant", slope=hv(0.0), level=0.0, winding=0))
    roots0, bands0 = profile.derivative_roots(0.0)
    for s, h2 in roots0:
        entries.append(SpectrumEntry(tau * hv(s), kind="constant", slope=hv(s), level=s, winding=0,
                                     degenerate=True))
    for a, b in bands0:
        m = 0.5 * (a + b)
        entries.append(SpectrumEntry(tau * hv(m), kind="constant", slope=hv(m), level=m, winding=0,
                                     interval=(a, b), degenerate=True))
    if tau != 0.0:
        kmax = int(np.floor(abs(tau) * profile.sup_abs_slope() + 1e-12))
        lo_w, hi_w = (-np.inf, np.inf) if window is None else window
        h_lo, h_hi = profile.extrema()
        start = _active_start(profile)
        for k in [j for j in range(-kmax, kmax + 1) if j != 0]:
            # action tau h(s) - k s can reach the window only for small enough s
            if k * tau > 0:
                s_hi = (max(tau * h_lo, tau * h_hi) - lo_w) / abs(k)
            else:
                s_hi = (hi_w - min(tau * h_lo, tau * h_hi)) / abs(k)
            if s_hi < start:
                continue
            roots, bands = profile.derivative_roots(k / tau)
            for s, h2 in roots:
                if s <= 0.0:
                    continue
                entries.append(SpectrumEntry(tau * hv(s) - k * s, winding=k, slope=hv(s), level=s,
                                             degenerate=abs(h2) < 1e-8))
            for a, b in bands:
                m = 0.5 * (a + b)
                entries.append(SpectrumEntry(tau * hv(m) - k * m, winding=k, slope=hv(m), level=m,
                                             interval=(a, b), kind="band", degenerate=True))
    return ActionSpectrum(cluster_entries(entries, tol), tol=tol, complete=True)


def radial_profile_of(H):
    """Profile of a radial Hamiltonian (also through radial compositions), else ``None``."""
    if isinstance(H, RadialHamiltonian):
        return H.profile
    if isinstance(H, SharpHamiltonian) and H._commuting():
        return H.as_radial().profile
    return None


# --------------------------------------------------------------------------
# seeds and shooting


def seed_grid(H, n_radial=192, n_angular=2, random_state=0):
    """Seeds on ``n_angular`` rays through the support ball, radii equispaced in ``s = pi r^2``."""
    rng = check_random_state(random_state)
    R = H.support_radius
    d = H.dim
    s = (np.arange(n_radial) + 0.5) / n_radial * np.pi * R * R
    r = np.sqrt(s / np.pi)
    pts = [np.zeros((1, d))]
    for j in range(n_angular):
        if d == 2:
            ang = 2 * np.pi * (j + 0.5 * rng.random()) / n_angular + 0.1 * np.arange(n_radial) / n_radial
            dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        else:
            # one random direction per block, so each block is a ray
            g = rng.standard_normal(d)
            dirs = np.broadcast_to(g / np.linalg.norm(g), (n_radial, d))
        pts.append(dirs * r[:, None])
    return np.vstack(pts)


def ray_minima(H, seeds, n_radial, n_angular, iters=48):
    """Extra seeds at local minima of ``|phi(x) - x|`` along each seed ray.

    Orbits whose Newton basin is narrower than the seed spacing still show
    up as a dip of the return residual; a batched golden-section search on
    the chord through the neighbouring seeds pins the dip down.
    """
    d = seeds.shape[1]
    if seeds.shape[0] != 1 + n_radial * n_angular or n_radial < 3:
        return np.zeros((0, d))
    res = np.linalg.norm(flow_map(H, seeds) - seeds, axis=1)
    B = seeds[1:].reshape(n_angular, n_radial, d)
    r = res[1:].reshape(n_angular, n_radial)
    i = np.arange(1, n_radial - 1)
    mask = (r[:, i] <= r[:, i - 1]) & (r[:, i] <= r[:, i + 1])
    b, j = np.nonzero(mask)
    if b.size == 0:
        return np.zeros((0, d))
    j = j + 1
    A, C = B[b, j - 1], B[b, j + 1]
    f = lambda u: np.linalg.norm(flow_map(H, A + u[:, None] * (C - A)) - (A + u[:, None] * (C - A)), axis=1)  # noqa: E731
    g = 0.5 * (np.sqrt(5.0) - 1.0)
    lo, hi = np.zeros(b.size), np.ones(b.size)
    u1, u2 = hi - g * (hi - lo), lo + g * (hi - lo)
    f1, f2 = f(u1), f(u2)
    for _ in range(iters):
        left = f1 < f2
        hi = np.where(left, u2, hi)
        lo = np.where(left, lo, u1)
        u2n = np.where(left, u1, lo + g * (hi - lo))
        u1n = np.where(left, hi - g * (hi - lo), u2)
        fn = f(np.where(left, u1n, u2n))
        f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
        u1, u2 = u1n, u2n
    u = 0.5 * (lo + hi)
    return A + u[:, None] * (C - A)


def shoot(H, X, tol=1e-11, max_iter=40, t0=0.0, t1=1.0):
    """Batched damped Gauss-Newton on ``F(x) = phi(x) - x``.

    Returns
    -------
    X : ndarray
        Final iterates.
    res : ndarray
        ``|F|`` at the final iterates.
    M : ndarray
        Jacobians of the flow there.
    converged : ndarray of bool
    """
    X = np.array(X, dtype=float)
    N, d = X.shape
    R = H.support_radius if H.support_radius is not None else 1.0
    step_cap = 0.25 * max(R, 1e-3)
    Y, M = flow_map(H, X, t0, t1, jac=True)
    F = Y - X
    res = np.linalg.norm(F, axis=1)
    for _ in range(max_iter):
        active = res > tol * (1 + np.linalg.norm(X, axis=1))
        if not np.any(active):
            break
        idx = np.nonzero(active)[0]
        A = M[idx] - np.eye(d)
        step = -np.einsum("nij,nj->ni", np.linalg.pinv(A, rcond=1e-10), F[idx])
        norm = np.linalg.norm(step, axis=1, keepdims=True)
        step *= np.minimum(1.0, step_cap / np.maximum(norm, 1e-300))
        lam = np.ones(idx.size)
        trial_X = X[idx] + step
        Yt, Mt = flow_map(H, trial_X, t0, t1, jac=True)
        rt = np.linalg.norm(Yt - trial_X, axis=1)
        for _ in range(6):
            bad = rt >= res[idx]
            if not np.any(bad):
                break
            lam[bad] *= 0.5
            trial_X[bad] = X[idx][bad] + lam[bad, None] * step[bad]
            Yb, Mb = flow_map(H, trial_X[bad], t0, t1, jac=True)
            Yt[bad], Mt[bad] = Yb, Mb
            rt[bad] = np.linalg.norm(Yb - trial_X[bad], axis=1)
        improved = rt < res[idx]
        sel = idx[improved]
        X[sel], M[sel], F[sel], res[sel] = trial_X[improved], Mt[improved], (Yt - trial_X)[improved], rt[improved]
        if not np.any(improved):
            break
    converged = res <= 1e-9 * (1 + np.linalg.norm(X, axis=1))
    return X, res, M, converged


def orbit_samples(H, x0, n_nodes):
    """``x(t_j)`` for ``t_j = j / N`` along the orbit through ``x0``."""
    t = np.arange(n_nodes) / n_nodes
    X0 = np.repeat(x0[None, :], n_nodes, axis=0)
    if H.closed_flow(0.0, 0.0, X0[:1]) is not None:
        out = np.empty_like(X0)
        for j, tj in enumerate(t):
            out[j] = H.closed_flow(0.0, tj, X0[j:j + 1])[0]
        return out
    sol = _integrate_stack(H, x0[None, :], 0.0, 1.0, False, 1e-12, 1e-13, t_eval=t)
    return sol.y.T


def batch_orbit_samples(H, X, n_nodes):
    """Samples (N, n_nodes, 2n) of the orbits through the rows of ``X``."""
    t = np.arange(n_nodes) / n_nodes
    if H.closed_flow(0.0, 0.0, X[:1]) is not None:
        return np.stack([X] + [H.closed_flow(0.0, tj, X) for tj in t[1:]], axis=1)
    sol = _integrate_stack(H, X, 0.0, 1.0 - 1.0 / n_nodes, False, 1e-10, 1e-11, t_eval=t)
    return sol.y.reshape(X.shape[0], X.shape[1], n_nodes).transpose(0, 2, 1)


def orbit_nodes(H, x0, t):
    """Values and velocities along the orbit at arbitrary times ``t``."""
    X = np.empty((len(t), len(x0)))
    if H.closed_flow(0.0, 0.0, x0[None, :]) is not None:
        for j, tj in enumerate(t):
            X[j] = H.closed_flow(0.0, tj, x0[None, :])[0]
    else:
        order = np.argsort(t)
        sol = _integrate_stack(H, x0[None, :], 0.0, 1.0, False, 1e-12, 1e-13, t_eval=np.asarray(t)[order])
        X[order] = sol.y.T
    if H.autonomous:
        V = H._vector_field(0.0, X)
    else:
        V = np.vstack([H._vector_field(tj, X[j:j + 1]) for j, tj in enumerate(t)])
    return X, V


def _fit_loop(H, x0, kmax_cap=64, tol=1e-12):
    scale = max(1.0, float(np.linalg.norm(x0)))
    K = 8
    while True:
        S = orbit_samples(H, x0, 4 * K)
        loop = FourierLoop.from_samples(S, K)
        tail = np.abs(loop.coeffs[np.abs(loop.modes) > 3 * K // 4]).max(initial=0.0)
        if tail < tol * scale or K >= kmax_cap:
            return loop
        K *= 2


def _synthesis_matrix(kmax, n_nodes, dim):
    """Real matrix S with ``vec(x(t_j)) = S vec(coeffs)``."""
    n = dim // 2
    t = np.arange(n_nodes) / n_nodes
    k = np.arange(-kmax, kmax + 1)
    th = 2 * np.pi * np.outer(t, k)
    c, s = np.cos(th), np.sin(th)
    S = np.zeros((n_nodes, dim, 2 * kmax + 1, dim))
    # exp(theta J) = cos I + sin J with J(q, p) = (p, -q)
    for i in range(n):
        S[:, i, :, i] = c
        S[:, i, :, n + i] = s
        S[:, n + i, :, n + i] = c
        S[:, n + i, :, i] = -s
    return S.reshape(n_nodes * dim, (2 * kmax + 1) * dim)


def refine_loop(H, loop, tol=1e-12, max_iter=8):
    """Newton on the H^{1/2} gradient of the action in coefficient space."""
    K, d = loop.kmax, loop.dim
    N = loop.default_nodes()
    S = _synthesis_matrix(K, N, d)
    A = S.T / N
    w = np.repeat(h12_weights(K), d)
    sgn = np.repeat(np.sign(np.arange(-K, K + 1)).astype(float), d)
    c = loop.coeffs.ravel().copy()

    def grad(cvec):
        lp = FourierLoop(cvec.reshape(-1, d))
        X = lp.samples(N)
        G = H._gradient(0.0, X)
        return sgn * cvec + l2_modes(G, K).ravel() / w, X

    g, X = grad(c)
    for _ in range(max_iter):
        if np.max(np.abs(g)) < tol:
            break
        Hs = H._hessian(0.0, X)
        B = np.zeros((N * d, N * d))
        for j in range(N):
            B[j * d:(j + 1) * d, j * d:(j + 1) * d] = Hs[j]
        Jm = np.diag(sgn) + (A @ B @ S) / w[:, None]
        dc = np.linalg.lstsq(Jm, -g, rcond=1e-12)[0]
        c_new = c + dc
        g_new, X_new = grad(c_new)
        if np.max(np.abs(g_new)) >= np.max(np.abs(g)):
            break
        c, g, X = c_new, g_new, X_new
    return FourierLoop(c.reshape(-1, d)), float(np.max(np.abs(g)))


def action_of(H, orbit, order=48):
    """Action ``-int_cap omega0 + int_0^1 H(t, x(t)) dt`` of an orbit.

    Autonomous orbits are smooth loops and use the Fourier representation;
    orbits of time-dependent H may have time break points and use composite
    Gauss-Legendre quadrature along the trajectory instead.
    """
    if H.autonomous:
        return loop_action(H, orbit.loop)
    t, w = gauss_nodes(H.breakpoints, order)
    X, V = orbit_nodes(H, orbit.x0, t)
    return quadrature_action(H, t, w, X, V)


def _slope(H, orbit, order=48):
    t, w = gauss_nodes(H.breakpoints, order)
    X, _ = orbit_nodes(H, orbit.x0, t)
    if H.autonomous:
        return float(w @ H._value(0.0, X))
    return float(w @ np.array([H._value(tj, X[j:j + 1])[0] for j, tj in enumerate(t)]))


def _hausdorff(A, B):
    da, _ = cKDTree(B).query(A)
    db, _ = cKDTree(A).query(B)
    return max(da.max(), db.max())


def find_orbits(H, seeds=None, tol=1e-11, refine=True, kmax=64, n_radial=192, n_angular=2, random_state=0):
    """Locate contractible 1-periodic orbits from a seed cloud.

    Returns
    -------
    orbits : list of PeriodicOrbit
        Distinct orbits (constant ones grouped by critical value), sorted by
        action then by a loop fingerprint.
    stats : dict
        Seed counts: ``seeds``, ``converged``, ``dropped``.
    """
    d = H.dim
    if getattr(H, "is_zero", False):
        x0 = np.zeros(d)
        orb = PeriodicOrbit(x0, FourierLoop.constant(x0, 0), 0.0, True, winding=0,
                            monodromy=monodromy_report(np.eye(d)), level=0.0)
        return [orb], {"seeds": 0, "converged": 0, "dropped": 0, "critical_set": "all"}
    if seeds is None:
        seeds = seed_grid(H, n_radial=n_radial, n_angular=n_angular, random_state=random_state)
        seeds = np.vstack([seeds, ray_minima(H, seeds, n_radial, n_angular)])
    X, res, M, conv = shoot(H, seeds, tol=tol)
    stats = {"seeds": len(seeds), "converged": int(conv.sum()), "dropped": int((~conv).sum())}
    X, M = X[conv], M[conv]

    speed = np.linalg.norm(H._vector_field(0.0, X) if H.autonomous else
                           np.vstack([H._vector_field(0.0, X[i:i + 1]) for i in range(len(X))]), axis=1)
    constant = speed < 1e-9
    # a point is constant only if it is fixed for all times
    if not H.autonomous and np.any(constant):
        for i in np.nonzero(constant)[0]:
            tt = np.linspace(0, 1, 9)
            constant[i] = all(np.linalg.norm(H._vector_field(tj, X[i:i + 1])) < 1e-9 for tj in tt)

    orbits = []
    # constant orbits grouped by value
    cvals = {}
    for i in np.nonzero(constant)[0]:
        x0 = X[i]
        if H.autonomous:
            v = float(H._value(0.0, x0[None, :])[0])
        else:
            t, w = gauss_nodes(H.breakpoints)
            v = float(w @ np.array([H._value(tj, x0[None, :])[0] for tj in t]))
        key = round(v / CLUSTER_TOL)
        if key in cvals:
            cvals[key].count += 1
            continue
        orb = PeriodicOrbit(x0, FourierLoop.constant(x0, 0), v, True, winding=0,
                            monodromy=monodromy_report(M[i]), slope=v, level=float(np.pi * x0 @ x0))
        cvals[key] = orb
    orbits.extend(cvals.values())
    # the complement of the support is a family of constant orbits with action 0
    if not any(abs(o.action) <= CLUSTER_TOL for o in orbits):
        R = H.support_radius or 0.0
        xo = np.zeros(d)
        xo[0] = 2 * R + 1.0
        orbits.append(PeriodicOrbit(xo, FourierLoop.constant(xo, 0), 0.0, True, winding=0,
                                    monodromy=monodromy_report(np.eye(d)), level=float(np.pi * xo @ xo)))

    prof = radial_profile_of(H)
    idx = np.nonzero(~constant)[0]
    # time-shift invariant fingerprint: mode amplitudes and a rough action
    clouds = batch_orbit_samples(H, X[idx], 64) if idx.size else np.zeros((0, 64, d))
    distinct, prints = [], []
    for j, i in enumerate(idx):
        lp = FourierLoop.from_samples(clouds[j], 31)
        fp = np.append(np.linalg.norm(lp.coeffs, axis=1), loop_action(H, lp, 64) if H.autonomous else 0.0)
        level = float(np.pi * X[i] @ X[i])
        dup = None
        for q, fq in zip(distinct, prints):
            if np.max(np.abs(fq - fp)) <= 1e-6 * (1 + np.abs(fp).max()):
                dup = q
                break
        if dup is not None:
            dup.count += 1
            continue
        distinct.append(PeriodicOrbit(X[i], None, 0.0, False, level=level, monodromy=monodromy_report(M[i])))
        prints.append(fp)

    for o in distinct:
        x0 = o.x0
        o.loop = _fit_loop(H, x0, kmax_cap=kmax)
        o.shoot_residual = float(np.linalg.norm(flow_map(H, x0[None, :])[0] - x0))
        if prof is not None:
            o.winding = int(np.rint(float(prof.d1(np.array([o.level]))[0])))
        else:
            amp = np.linalg.norm(o.loop.coeffs, axis=1)
            amp[o.loop.kmax] = 0.0
            o.winding = int(-o.loop.modes[int(np.argmax(amp))])
        o.action = action_of(H, o)

    for o in distinct:
        if refine and H.autonomous:
            loop, gres = refine_loop(H, o.loop.padded(o.loop.kmax))
            o.loop = loop
            o.x0 = loop(0.0)[0]
            o.action = loop_action(H, loop)
        o.action_fourier = loop_action(H, o.loop) if H.autonomous else float("nan")
        N = o.loop.default_nodes()
        from .loops import loop_residual
        o.loop_residual = float(np.abs(loop_residual(H, o.loop, N)).max()) if H.autonomous else o.shoot_residual
        o.slope = _slope(H, o)
    orbits.extend(distinct)
    orbits.sort(key=lambda o: (round(o.action / CLUSTER_TOL), 0 if o.constant else 1,
                               float(np.round(np.abs(o.loop.coeffs).sum(), 8))))
    return orbits, stats


def spectrum(H, tol=CLUSTER_TOL, **kw):
    """Action spectrum from :func:`find_orbits` (a verified subset of the true spectrum)."""
    orbits, stats = find_orbits(H, **kw)
    entries = []
    for o in orbits:
        entries.append(SpectrumEntry(o.action, multiplicity=o.count, winding=o.winding,
                                     kind="constant" if o.constant else "orbit",
                                     degenerate=o.degenerate, residual=max(o.shoot_residual, o.loop_residual),
                                     slope=o.slope, level=o.level, orbit=o))
    spec = ActionSpectrum(cluster_entries(entries, tol), tol=tol, complete=False)
    spec.stats = stats
    return spec


class OrbitFinder(BaseEstimator):
    """Estimator-style front end: ``OrbitFinder(...).fit(H).spectrum_``.

    Parameters
    ----------
    n_radial, n_angular : int
        Seed grid resolution.
    kmax : int
        Fourier truncation cap for orbit loops.
    refine : bool
        Run the spectral refinement stage.
    tol : float
        Clustering tolerance of spectral values.
    random_state : int or None
    """

    def __init__(self, n_radial=192, n_angular=2, kmax=64, refine=True, tol=CLUSTER_TOL, random_state=0):
        self.n_radial = n_radial
        self.n_angular = n_angular
        self.kmax = kmax
        self.refine = refine
        self.tol = tol
        self.random_state = random_state

    def fit(self, H, y=None):
        self.orbits_, self.stats_ = find_orbits(H, refine=self.refine, kmax=self.kmax, n_radial=self.n_radial,
                                                n_angular=self.n_angular, random_state=self.random_state)
        entries = [SpectrumEntry(o.action, multiplicity=o.count, winding=o.winding,
                                 kind="constant" if o.constant else "orbit", degenerate=o.degenerate,
                                 residual=max(o.shoot_residual, o.loop_residual), slope=o.slope,
                                 level=o.level, orbit=o) for o in self.orbits_]
        self.spectrum_ = ActionSpectrum(cluster_entries(entries, self.tol), tol=self.tol)
        return self

    def transform(self, H):
        """Spectral values of ``H`` as a 1-d array."""
        return self.fit(H).spectrum_.values


def check_converged(spec, tol=1e-8):
    bad = [e for e in spec.entries if e.residual > tol]
    if bad:
        raise ConvergenceError(f"{len(bad)} spectral entries have residual above {tol}", best=spec)
    return spec
