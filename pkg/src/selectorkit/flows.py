"""Hamiltonian flows, the variational equation and displacement checks.

Flows use an adaptive embedded Runge-Kutta pair (DOP853).  Many initial
conditions are stacked into a single ODE so one call to ``solve_ivp``
advances a whole seed cloud; the linearized flow rides along as extra
components when a Jacobian is requested.  Hamiltonians with an explicit
flow (radial ones rotate each complex coordinate) short-circuit the ODE.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.spatial import cKDTree

from ._validation import check_phase_point, check_points, check_positive, check_time
from .exceptions import FlowEscapeError, InputError, StepSizeError

DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-12


def standard_j(dim):
    """``J0 = [[0, -I], [I, 0]]`` in (q, p) coordinates.

    ``omega0(u, v) = <J0 u, v>`` and ``X_H = J0 grad H = (-dH/dp, dH/dq)``.
    """
    n = dim // 2
    J = np.zeros((dim, dim))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def omega0(u, v):
    """Standard symplectic form ``sum dq_i ^ dp_i`` on (..., 2n) arrays."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    n = u.shape[-1] // 2
    return np.sum(u[..., :n] * v[..., n:] - u[..., n:] * v[..., :n], axis=-1)


def apply_j(X):
    """``J0 @ x`` row-wise for an (N, 2n) array."""
    n = X.shape[-1] // 2
    return np.concatenate([-X[..., n:], X[..., :n]], axis=-1)


@dataclass
class Trajectory:
    """Sampled solution of Hamilton's equations.

    Attributes
    ----------
    t : ndarray, shape (m,)
    x : ndarray, shape (m, 2n)
    order : int
        Order of the integrator used to produce the samples.
    drift : float
        ``max |H(x(t)) - H(x(0))|`` for autonomous H, ``nan`` otherwise.
    """

    t: np.ndarray
    x: np.ndarray
    order: int = 8
    drift: float = float("nan")

    def to_csv(self, path=None, header=""):
        n = self.x.shape[1] // 2
        cols = ["t"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
        lines = [header.rstrip("\n")] if header else []
        lines.append(",".join(cols))
        for ti, xi in zip(self.t, self.x):
            lines.append(",".join(f"{v:.16e}" for v in (ti, *xi)))
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def to_svg(self, plane=(0, None), size=400):
        """Polyline of the projection onto the (q_i, p_i) plane."""
        i = plane[0]
        j = plane[1] if plane[1] is not None else i + self.x.shape[1] // 2
        return polyline_svg(self.x[:, [i, j]], size=size)


@dataclass
class MonodromyMatrix:
    """Linearized time-one map ``d phi^1_H(x0)`` with diagnostics.

    ``det_id_minus`` is ``det(id - M)``.  For autonomous, non-constant
    orbits the flow direction is always an eigenvector with eigenvalue 1,
    so this determinant vanishes; ``nullity`` counts eigenvalue-1
    directions and ``transversally_nondegenerate`` reports whether the
    flow direction is the only one.
    """

    matrix: np.ndarray
    symplectic_residual: float
    det_id_minus: float
    multipliers: np.ndarray
    nullity: int
    condition: float
    transversally_nondegenerate: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def nondegenerate(self):
        return abs(self.det_id_minus) > 1e-8


# --------------------------------------------------------------------------
# core batched integration


def _support_box(H):
    r = getattr(H, "support_radius", None)
    if r is None or not np.isfinite(r):
        return None
    return float(r)


def flow_map(H, X, t0=0.0, t1=1.0, jac=False, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
             closed_form=True, escape_radius=None):
    """Advance the points ``X`` (N, 2n) from ``t0`` to ``t1``.

    Returns ``X1`` or ``(X1, M)`` with ``M`` of shape (N, 2n, 2n) when
    ``jac`` is true.  Points outside the declared support are returned
    unchanged (with identity Jacobian) without integration.
    """
    X, _ = check_points(X, getattr(H, "dim", None))
    t0, t1 = check_time(t0), check_time(t1)
    N, d = X.shape
    X1 = X.copy()
    M = np.broadcast_to(np.eye(d), (N, d, d)).copy() if jac else None
    if N == 0 or t0 == t1 or getattr(H, "is_zero", False):
        return (X1, M) if jac else X1

    if closed_form:
        res = H.closed_flow(t0, t1, X, jac=jac)
        if res is not None:
            return res

    R = _support_box(H)
    active = np.ones(N, dtype=bool)
    if R is not None:
        active = np.einsum("ij,ij->i", X, X) < (R * (1 + 1e-12)) ** 2
    idx = np.nonzero(active)[0]
    if idx.size == 0:
        return (X1, M) if jac else X1

    Y, MY = _integrate_stack(H, X[idx], t0, t1, jac, rtol, atol)
    limit = escape_radius if escape_radius is not None else (None if R is None else R * (1 + 1e-6) + 1e-9)
    if limit is not None:
        rad = np.sqrt(np.einsum("ij,ij->i", Y, Y))
        if np.any(rad > limit):
            raise FlowEscapeError(f"trajectory left the ball of radius {limit:.6g} (reached {rad.max():.6g})")
    X1[idx] = Y
    if jac:
        M[idx] = MY
        return X1, M
    return X1


def _integrate_stack(H, X, t0, t1, jac, rtol, atol, t_eval=None, dense=False):
    N, d = X.shape
    size = N * d

    if jac:
        def rhs(t, y):
            Z = y[:size].reshape(N, d)
            V = y[size:].reshape(N, d, d)
            F = H._vector_field(t, Z)
            A = H._hessian(t, Z)
            JA = np.concatenate([-A[:, d // 2:, :], A[:, :d // 2, :]], axis=1)
            return np.concatenate([F.ravel(), np.matmul(JA, V).ravel()])

        y0 = np.concatenate([X.ravel(), np.broadcast_to(np.eye(d), (N, d, d)).ravel()])
    else:
        def rhs(t, y):
            return H._vector_field(t, y.reshape(N, d)).ravel()

        y0 = X.ravel()

    sol = solve_ivp(rhs, (t0, t1), y0, method="DOP853", rtol=rtol, atol=atol,
                    t_eval=t_eval, dense_output=dense)
    if sol.status != 0:
        raise StepSizeError(f"integration failed: {sol.message}")
    if t_eval is not None or dense:
        return sol
    yT = sol.y[:, -1]
    Y = yT[:size].reshape(N, d)
    MY = yT[size:].reshape(N, d, d) if jac else None
    return Y, MY


def integrate(H, x0, t0=0.0, t1=1.0, n_samples=201, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Integrate one trajectory and sample it on a uniform grid.

    Raises
    ------
    StepSizeError
        If the adaptive step collapses.
    FlowEscapeError
        If the trajectory leaves the support ball of a compactly supported H.
    """
    x0 = check_phase_point(x0, getattr(H, "dim", None))
    t0, t1 = check_time(t0), check_time(t1)
    t = np.linspace(t0, t1, int(n_samples))
    if t0 == t1 or getattr(H, "is_zero", False):
        x = np.repeat(x0[None, :], t.size, axis=0)
    else:
        sol = _integrate_stack(H, x0[None, :], t0, t1, False, rtol, atol, t_eval=t)
        x = sol.y.T
        R = _support_box(H)
        if R is not None:
            lim = max(R, float(np.linalg.norm(x0))) * (1 + 1e-6) + 1e-9
            if np.max(np.linalg.norm(x, axis=1)) > lim:
                raise FlowEscapeError("trajectory left the support ball")
    drift = float("nan")
    if getattr(H, "autonomous", False):
        e = H._value(0.0, x)
        drift = float(np.max(np.abs(e - e[0])))
    return Trajectory(t=t, x=x, drift=drift)


def time_one_map(H, x0, **kw):
    """``phi_H^1(x0)`` for one point (d,) or a cloud (N, d)."""
    X, single = check_points(x0, getattr(H, "dim", None))
    Y = flow_map(H, X, 0.0, 1.0, **kw)
    return Y[0] if single else Y


def monodromy(H, x0, t0=0.0, t1=1.0, eig_tol=1e-6, **kw):
    """Linearized flow ``d phi_H^{t0 -> t1}(x0)`` with nondegeneracy data."""
    x0 = check_phase_point(x0, getattr(H, "dim", None))
    _, M = flow_map(H, x0[None, :], t0, t1, jac=True, **kw)
    return monodromy_report(M[0], eig_tol=eig_tol)


def monodromy_report(M, eig_tol=1e-6):
    d = M.shape[0]
    J = standard_j(d)
    resid = float(np.linalg.norm(M.T @ J @ M - J))
    det = float(np.linalg.det(np.eye(d) - M))
    mult = np.linalg.eigvals(M)
    mult = mult[np.lexsort((mult.imag, mult.real))]
    # algebraic multiplicity of eigenvalue 1 seen through singular values of id - M
    sv = np.linalg.svd(np.eye(d) - M, compute_uv=False)
    nullity = int(np.sum(sv < eig_tol * max(1.0, np.linalg.norm(M))))
    cond = float(np.linalg.cond(M))
    return MonodromyMatrix(matrix=M, symplectic_residual=resid, det_id_minus=det, multipliers=mult,
                           nullity=nullity, condition=cond, transversally_nondegenerate=(nullity == 1),
                           extra={"singular_values": sv})


# --------------------------------------------------------------------------
# displacement


def covering_radius(cloud, region_sampler=None, n_probe=20000, seed=0):
    """Estimate how far a point of the underlying set can be from the cloud.

    ``region_sampler(n, rng)`` draws probe points from the set; by default
    the probes are convex combinations of random cloud pairs, which is
    adequate for convex sets.
    """
    cloud = np.asarray(cloud, dtype=float)
    rng = np.random.default_rng(seed)
    if region_sampler is None:
        i = rng.integers(0, len(cloud), n_probe)
        j = rng.integers(0, len(cloud), n_probe)
        w = rng.random((n_probe, 1))
        probes = w * cloud[i] + (1 - w) * cloud[j]
    else:
        probes = region_sampler(n_probe, rng)
    d, _ = cKDTree(cloud).query(probes)
    return float(d.max())


def displacement_check(K, cloud, margin, cover=None, mapped=None, **kw):
    """Certify ``phi_K(A) cap A = empty`` on a sample cloud of ``A``.

    Parameters
    ----------
    K : Hamiltonian
    cloud : ndarray, shape (N, 2n)
        Samples of the compact set ``A``.
    margin : float
        Required separation between the image cloud and the cloud.
    cover : float, optional
        Covering radius of the cloud; if omitted it is estimated.
        Clouds with ``cover > margin / 4`` are rejected.
    mapped : ndarray, optional
        Precomputed ``phi_K(cloud)`` (skips integration).

    Returns
    -------
    ok : bool
        True iff the minimal distance strictly exceeds ``margin``.
    info : dict
        ``min_distance``, ``cover`` and ``margin``.
    """
    cloud, _ = check_points(cloud)
    margin = check_positive(margin, "margin")
    if cover is None:
        cover = covering_radius(cloud)
    if cover > margin / 4:
        raise InputError(f"cloud covering radius {cover:.3g} exceeds margin/4 = {margin / 4:.3g}")
    image = flow_map(K, cloud, 0.0, 1.0, **kw) if mapped is None else np.asarray(mapped, dtype=float)
    dist, _ = cKDTree(cloud).query(image)
    dmin = float(dist.min())
    return dmin > margin, {"min_distance": dmin, "cover": float(cover), "margin": margin}


def polyline_svg(points, closed=False, size=400, extra=()):
    """Tiny SVG writer for a planar polyline (points of shape (m, 2))."""
    P = np.asarray(points, dtype=float)
    allp = np.vstack([P] + [np.asarray(e, dtype=float) for e in extra]) if extra else P
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.05 * span

    def tr(Q):
        Q = (Q - lo + pad) / (span + 2 * pad) * size
        Q[:, 1] = size - Q[:, 1]
        return " ".join(f"{a:.3f},{b:.3f}" for a, b in Q)

    tag = "polygon" if closed else "polyline"
    body = [f'<{tag} points="{tr(P)}" fill="none" stroke="black" stroke-width="1"/>']
    for e in extra:
        body.append(f'<polygon points="{tr(np.asarray(e, dtype=float))}" fill="none" stroke="gray" stroke-width="0.5"/>')
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">'
            + "".join(body) + "</svg>\n")
