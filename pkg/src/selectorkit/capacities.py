"""Capacity estimates for model bodies in R^2n and the inequality chain.

Lower bounds come from explicit witnesses: an inscribed ball (Gromov
width), an admissible simple radial bump (Hofer-Zehnder), selector values
of simple Hamiltonians (spectral capacity).  Upper bounds come only from
the displacement energy of an explicit shear and are pushed down the chain
``c_G <= c_HZ <= c_HZ^o <= c_sigma <= e``.
"""

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from ._validation import check_dimension, check_positive, check_random_state
from .exceptions import AmbiguousBranch, CertificationError, InputError
from .flows import covering_radius, displacement_check, flow_map
from .gauges import EllipsoidGauge, StarGauge2D
from .hamiltonians import (Hamiltonian, RadialHamiltonian, classify_simple, epsilon_truncate,
                           is_admissible_radial)
from .profiles import PiecewiseCubic, ProfileFunction

QUANTITIES = ("c_G", "c_HZ", "c_HZ^o", "c_sigma", "c_sigma_hat", "e")


# --------------------------------------------------------------------------
# bodies


class Body:
    """Compact model body in R^2n (``Cylinder`` is truncated by a box).

    Subclasses provide ``contains``, ``inscribed_radius`` (a ball
    ``B(r) subset body``), ``plane_radius(i)`` (the projection to the
    ``(q_i, p_i)`` plane lies in a disc of this radius) and
    ``rest_radius(i)`` (bound on ``|z_j|`` for ``j != i``).
    """

    dim = 2
    name = "body"

    def contains(self, X):
        raise NotImplementedError

    def inscribed_radius(self):
        raise NotImplementedError

    def plane_radius(self, i):
        raise NotImplementedError

    def rest_radius(self, i):
        return self.bounding_radius()

    def bounding_radius(self):
        raise NotImplementedError

    def scaled(self, lam):
        raise NotImplementedError

    def sample(self, n, random_state=0):
        """Rejection samples from the body (inside its bounding box)."""
        rng = check_random_state(random_state)
        R = self.bounding_radius()
        out = np.zeros((0, self.dim))
        while len(out) < n:
            X = rng.uniform(-R, R, size=(4 * n, self.dim))
            out = np.vstack([out, X[self.contains(X)]])
        return out[:n]

    def best_plane(self):
        radii = [self.plane_radius(i) for i in range(self.dim // 2)]
        return int(np.argmin(radii))

    def __repr__(self):
        return self.name


class Ball(Body):
    def __init__(self, r=1.0, dim=2):
        self.r = check_positive(r, "r", allow_zero=True)
        self.dim = check_dimension(dim)
        self.name = f"ball:r={self.r:g},dim={self.dim}"

    def contains(self, X):
        return np.einsum("ij,ij->i", X, X) < self.r ** 2

    def inscribed_radius(self):
        return self.r

    def plane_radius(self, i):
        return self.r

    def bounding_radius(self):
        return self.r

    def scaled(self, lam):
        return Ball(self.r * lam, self.dim)

    @property
    def gauge(self):
        return EllipsoidGauge(np.full(self.dim // 2, np.pi * self.r ** 2))


class Ellipsoid(Body):
    """``E(a) = {sum pi |z_i|^2 / a_i < 1}``."""

    def __init__(self, a):
        self.gauge = EllipsoidGauge(a)
        self.a = self.gauge.a
        self.dim = self.gauge.dim
        self.name = "ellipsoid:a=" + ",".join(f"{v:g}" for v in self.a)

    def contains(self, X):
        return self.gauge.value(X) < 1.0

    def inscribed_radius(self):
        return float(np.sqrt(self.a.min() / np.pi))

    def plane_radius(self, i):
        return float(np.sqrt(self.a[i] / np.pi))

    def rest_radius(self, i):
        return float(np.sqrt(np.delete(self.a, i).max() / np.pi)) if self.a.size > 1 else 0.0

    def bounding_radius(self):
        return float(np.sqrt(self.a.max() / np.pi))

    def scaled(self, lam):
        return Ellipsoid(self.a * lam ** 2)


class Polydisc(Body):
    """``P(a) = {pi |z_i|^2 < a_i for all i}``; zero entries give empty interior."""

    def __init__(self, a):
        a = np.atleast_1d(np.asarray(a, dtype=float))
        if np.any(~np.isfinite(a)) or np.any(a < 0):
            raise InputError("polydisc parameters must be non-negative")
        self.a = a
        self.dim = 2 * a.size
        self.name = "polydisc:a=" + ",".join(f"{v:g}" for v in a)

    def contains(self, X):
        n = self.dim // 2
        s = np.pi * (X[:, :n] ** 2 + X[:, n:] ** 2)
        return np.all(s < self.a, axis=1)

    def inscribed_radius(self):
        return float(np.sqrt(self.a.min() / np.pi))

    def plane_radius(self, i):
        return float(np.sqrt(self.a[i] / np.pi))

    def rest_radius(self, i):
        return float(np.sqrt(np.delete(self.a, i).max() / np.pi)) if self.a.size > 1 else 0.0

    def bounding_radius(self):
        return float(np.sqrt(self.a.sum() / np.pi))

    def scaled(self, lam):
        return Polydisc(self.a * lam ** 2)


class Cylinder(Body):
    """``Z(r) = {q_1^2 + p_1^2 < r^2}``, truncated to ``|z_j| <= box`` for sampling.

    Displacement bounds do not depend on ``box``, so they hold for every
    compact piece of the cylinder.
    """

    def __init__(self, r=1.0, dim=4, box=4.0):
        self.r = check_positive(r, "r")
        self.dim = check_dimension(dim)
        self.box = float(box)
        self.name = f"cylinder:r={self.r:g},dim={self.dim}"

    def contains(self, X):
        n = self.dim // 2
        inside = X[:, 0] ** 2 + X[:, n] ** 2 < self.r ** 2
        if n > 1:
            rest = X[:, 1:n] ** 2 + X[:, n + 1:] ** 2
            inside &= np.all(rest <= self.box ** 2, axis=1)
        return inside

    def inscribed_radius(self):
        return self.r

    def plane_radius(self, i):
        return self.r if i == 0 else np.inf

    def rest_radius(self, i):
        return self.box

    def bounding_radius(self):
        return float(np.sqrt(self.r ** 2 + (self.dim // 2 - 1) * self.box ** 2))

    def scaled(self, lam):
        return Cylinder(self.r * lam, self.dim, self.box * lam)


class StarShaped(Body):
    """Planar star-shaped domain ``{|x| < rho(theta)}``."""

    def __init__(self, gauge, name="star"):
        if gauge.dim != 2:
            raise InputError("star-shaped bodies are planar")
        self.gauge = gauge
        self.dim = 2
        self.name = name

    @classmethod
    def from_function(cls, func, name="star"):
        return cls(StarGauge2D.from_function(func), name=name)

    def contains(self, X):
        return self.gauge.value(X) < 1.0

    def inscribed_radius(self):
        # grid minimum minus the spline's worst slope times half the grid step
        th = np.linspace(0.0, 2 * np.pi, 20000, endpoint=False)
        rho = self.gauge.rho(th)
        slack = np.abs(self.gauge.drho(th)).max() * np.pi / 20000
        return float(max(rho.min() - slack, 0.0))

    def plane_radius(self, i):
        return self.bounding_radius()

    def bounding_radius(self):
        return self.gauge.max_radius()

    def scaled(self, lam):
        th = np.linspace(0.0, 2 * np.pi, 720, endpoint=False)
        return StarShaped(StarGauge2D(th, lam * self.gauge.rho(th)), name=f"{self.name}*{lam:g}")


def parse_body(spec):
    """Parse ``ball:r=1,dim=4``, ``ellipsoid:a=1,2``, ``cylinder:r=1,dim=4``,
    ``polydisc:a=1,2`` or ``star:r=1,amp=0.2,k=3``.
    """
    kind, _, rest = spec.partition(":")
    kw, key = {}, None
    for tok in [t for t in rest.split(",") if t]:
        if "=" in tok:
            key, val = tok.split("=", 1)
            kw[key.strip()] = [val.strip()]
        elif key is not None:
            kw[key].append(tok.strip())
        else:
            raise InputError(f"cannot parse body spec {spec!r}")
    try:
        num = {k: [float(v) for v in vals] for k, vals in kw.items() if k != "file"}
        kind = kind.strip().lower()
        if kind == "ball":
            return Ball(num.get("r", [1.0])[0], int(num.get("dim", [2])[0]))
        if kind == "ellipsoid":
            return Ellipsoid(num["a"])
        if kind == "polydisc":
            return Polydisc(num["a"])
        if kind == "cylinder":
            return Cylinder(num.get("r", [1.0])[0], int(num.get("dim", [4])[0]), num.get("box", [4.0])[0])
        if kind == "star":
            if "file" in kw:
                data = np.loadtxt(kw["file"][0], delimiter=",", comments="#")
                return StarShaped(StarGauge2D(data[:, 0], data[:, 1]), name=spec)
            r, amp, k = num.get("r", [1.0])[0], num.get("amp", [0.2])[0], num.get("k", [3.0])[0]
            return StarShaped.from_function(lambda t: r * (1 + amp * np.cos(k * t)), name=spec)
    except (KeyError, ValueError, IndexError, OSError) as exc:
        raise InputError(f"cannot parse body spec {spec!r}: {exc}") from exc
    raise InputError(f"unknown body kind {kind!r}")


# --------------------------------------------------------------------------
# estimates


@dataclass
class CapacityEstimate:
    quantity: str
    lower: float = 0.0
    upper: float = np.inf
    witness: object = None
    witness_id: str = ""
    provenance: str = ""
    tol: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise InputError(f"unknown capacity tag {self.quantity!r}")

    @property
    def consistent(self):
        return self.lower <= self.upper + 1e-9

    def row(self, body):
        buf = io.StringIO()
        csv.writer(buf, lineterminator="").writerow(
            [body, self.quantity, f"{self.lower:.12g}", f"{self.upper:.12g}", self.witness_id])
        return buf.getvalue()


def gromov_lower(body):
    """``c_G >= pi r^2`` for the largest ball ``B(r)`` included in the body."""
    r = body.inscribed_radius()
    return CapacityEstimate("c_G", lower=np.pi * r * r, witness=("inclusion", r),
                            witness_id=f"ball_inclusion(r={r:.12g})", provenance="inclusion")


def admissible_bump(area, delta, dim=2):
    """Simple radial H with ``max H = area - delta``, support in ``pi |x|^2 < area``, ``sup |h'| < 1``."""
    area, delta = float(area), float(delta)
    if not 0.0 < delta < area:
        raise InputError("need 0 < delta < area")
    w = delta / 8.0
    prof = ProfileFunction.bump(area - delta, w, area - w, corner=w)
    return RadialHamiltonian(prof, dim)


def hz_lower_radial(body, delta):
    """``c_HZ >= max H`` for an admissible simple bump in the inscribed ball."""
    delta = check_positive(delta, "delta")
    r = body.inscribed_radius()
    area = np.pi * r * r
    if delta >= area:
        raise InputError("delta must be smaller than the inscribed-ball capacity")
    H = admissible_bump(area, delta, body.dim)
    rep = classify_simple(H)
    if not (rep.is_simple and is_admissible_radial(H.profile)):
        raise CertificationError("bump witness failed the admissibility or simplicity check")
    return CapacityEstimate("c_HZ", lower=rep.max_value, witness=H,
                            witness_id=f"admissible_bump(max={rep.max_value:.12g},slope={H.profile.sup_abs_slope():.6f})",
                            provenance="admissible simple radial H", tol=delta)


# --------------------------------------------------------------------------
# shear displacer


class ShearHamiltonian(Hamiltonian):
    """``K = g(p_i) chi(q_i) prod_{j != i} psi(|z_j|^2)``.

    On the plateau ``chi = psi = 1`` the flow is the shear
    ``q_i -> q_i - t g'(p_i)`` with everything else fixed.
    """

    autonomous = True

    def __init__(self, g, chi, psi, plane, dim, plateau_q, plateau_rest):
        self.g, self.chi, self.psi = g, chi, psi
        self.plane, self.dim = int(plane), check_dimension(dim)
        self.plateau_q, self.plateau_rest = float(plateau_q), float(plateau_rest)
        n = self.dim // 2
        qmax = float(chi.knots[-1])
        pmax = float(max(abs(g.knots[0]), abs(g.knots[-1])))
        rest = float(np.sqrt(psi.knots[-1])) if n > 1 else 0.0
        self.support_radius = float(np.sqrt(qmax ** 2 + pmax ** 2 + (n - 1) * rest ** 2))
        lo, hi = g.extrema()
        self._range = (min(lo, 0.0), max(hi, 0.0))

    def _split(self, X):
        n = self.dim // 2
        i = self.plane
        q, p = X[:, i], X[:, n + i]
        others = [j for j in range(n) if j != i]
        s = [X[:, j] ** 2 + X[:, n + j] ** 2 for j in others]
        return q, p, others, s

    def _rest(self, s):
        vals = [self.psi.value(sj) for sj in s]
        ders = [self.psi.d1(sj) for sj in s]
        return vals, ders

    def _value(self, t, X):
        q, p, _, s = self._split(X)
        out = self.g.value(p) * self.chi.value(q)
        for v in self._rest(s)[0]:
            out = out * v
        return out

    def _gradient(self, t, X):
        n = self.dim // 2
        q, p, others, s = self._split(X)
        gv, g1 = self.g.value(p), self.g.d1(p)
        cv, c1 = self.chi.value(q), self.chi.d1(q)
        vals, ders = self._rest(s)
        prod = np.ones(len(X))
        for v in vals:
            prod = prod * v
        G = np.zeros_like(X)
        G[:, self.plane] = gv * c1 * prod
        G[:, n + self.plane] = g1 * cv * prod
        for k, j in enumerate(others):
            part = np.ones(len(X))
            for m, v in enumerate(vals):
                if m != k:
                    part = part * v
            coef = gv * cv * ders[k] * part * 2
            G[:, j] = coef * X[:, j]
            G[:, n + j] = coef * X[:, n + j]
        return G

    def on_plateau(self, X):
        q, _, _, s = self._split(X)
        ok = np.abs(q) <= self.plateau_q
        for sj in s:
            ok &= sj <= self.plateau_rest ** 2
        return ok

    def closed_flow(self, t0, t1, X, jac=False):
        n = self.dim // 2
        q, p, _, _ = self._split(X)
        dt = t1 - t0
        q1 = q - dt * self.g.d1(p)
        if not (np.all(self.on_plateau(X)) and np.all(np.abs(q1) <= self.plateau_q)):
            return None
        Y = X.copy()
        Y[:, self.plane] = q1
        if not jac:
            return Y
        M = np.broadcast_to(np.eye(self.dim), (len(X), self.dim, self.dim)).copy()
        M[:, self.plane, n + self.plane] = -dt * self.g.d2(p)
        return Y, M

    def slice_extrema(self, t, **kw):
        return self._range


def _chord_integral(R2, p):
    """``int_{-r}^{p} 2 sqrt(R2 - s^2) ds`` with ``r = sqrt(R2 - eta)`` handled by the caller."""
    R = np.sqrt(R2)
    return p * np.sqrt(np.maximum(R2 - p * p, 0.0)) + R2 * np.arcsin(np.clip(p / R, -1, 1))


def shear_displacer(r, delta, plane=0, dim=2, rest_radius=0.0, n_knots=257):
    """Shear K whose time-1 map moves the disc of radius r in plane ``plane`` off itself.

    ``g'(p) = 2 sqrt(r^2 + eta - p^2) + d2`` on ``|p| <= r`` exceeds the
    chord length ``2 sqrt(r^2 - p^2)`` by at least ``d2``; the oscillation of
    K is ``max g`` which is at most ``pi r^2 + delta``.
    """
    r = check_positive(r, "r")
    delta = check_positive(delta, "delta")
    eta = delta / (4 * np.pi)
    d2 = delta / (8 * r)
    R2 = r * r + eta
    theta = np.linspace(np.pi, 0.0, n_knots)
    p = r * np.cos(theta)
    p[0], p[-1] = -r, r
    phi = 2 * np.sqrt(R2 - p * p) + d2
    G = _chord_integral(R2, p) - _chord_integral(R2, -r) + d2 * (p + r)
    a = 0.05 * r
    v0 = a * phi[0] / 2
    top = G[-1] + v0 + a * phi[-1] / 2
    b = 2 * r
    knots = np.concatenate([[-r - a], p, [r + a, r + a + b / 2, r + a + b]])
    values = np.concatenate([[0.0], G + v0, [top, top / 2, 0.0]])
    slopes = np.concatenate([[0.0], phi, [0.0, -1.5 * top / b, 0.0]])
    g = PiecewiseCubic(knots, values, slopes)
    # the interpolant must keep the chord margin
    pp = np.linspace(-r, r, 20001)
    excess = g.d1(pp) - 2 * np.sqrt(np.maximum(r * r - pp * pp, 0.0))
    if excess.min() < 0.5 * d2:
        raise CertificationError("shear profile lost its chord margin")
    shift = float(phi.max())
    Q = r + shift + 0.1 * r
    chi = PiecewiseCubic([-Q - r, -Q, Q, Q + r], [0.0, 1.0, 1.0, 0.0], [0.0, 0.0, 0.0, 0.0])
    rr = max(float(rest_radius), 1e-3 * r)
    psi = PiecewiseCubic([-1.0, rr * rr, 1.21 * rr * rr + 0.01 * r * r], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0])
    K = ShearHamiltonian(g, chi, psi, plane, dim, Q, rr)
    K.norm = float(top)
    K.chord_margin = float(excess.min())
    return K


def _circle_points(r, th):
    return np.stack([r * np.cos(th), r * np.sin(th)], axis=1)


def _circle(r, n):
    return _circle_points(r, 2 * np.pi * np.arange(n) / n)


def certify_shear(K, r, n_boundary=2 ** 16, n_check=48, seed=0):
    """Certify that ``phi_K`` displaces the disc of radius r in K's plane.

    In the plane, ``phi_K(D) cap D = empty`` as soon as the boundary
    circles are disjoint: nested images are excluded because ``phi_K``
    preserves area.  The boundary cloud is mapped by the exact plateau
    shear; a sub-sample is re-integrated by the ODE solver.
    """
    planar = ShearHamiltonian(K.g, K.chi, K.psi, 0, 2, K.plateau_q, K.plateau_rest)
    cloud = _circle(r, n_boundary)
    spacing = 2 * r * np.sin(np.pi / n_boundary)
    cover = covering_radius(cloud, lambda n, rng: _circle_points(r, rng.uniform(0, 2 * np.pi, n)), seed=seed)
    cover = max(cover, spacing / 2)
    mapped = planar.closed_flow(0.0, 1.0, cloud)
    if mapped is None:
        raise CertificationError("boundary leaves the shear plateau")
    margin = 4.0 * cover * 1.01
    ok, info = displacement_check(planar, cloud, margin, cover=cover, mapped=mapped)
    rng = np.random.default_rng(seed)
    idx = rng.choice(n_boundary, n_check, replace=False)
    ode = flow_map(planar, cloud[idx], closed_form=False)
    info["ode_mismatch"] = float(np.abs(ode - mapped[idx]).max())
    ok = ok and info["ode_mismatch"] < 1e-8
    if K.dim > 2:
        # the full flow acts on the plane only: spot-check the lift
        n = K.dim // 2
        X = rng.standard_normal((n_check, K.dim))
        X *= (rng.random((n_check, 1)) ** (1 / K.dim)) * 0.99 * min(r, K.plateau_rest) / np.linalg.norm(X, axis=1,
                                                                                                         keepdims=True)
        Y = flow_map(K, X, closed_form=False)
        Z = K.closed_flow(0.0, 1.0, X)
        info["lift_mismatch"] = float(np.abs(Y - Z).max())
        ok = ok and info["lift_mismatch"] < 1e-8
    info["chord_margin"] = K.chord_margin
    return bool(ok), info


def displacement_upper(body, delta, certify=True, n_boundary=2 ** 16):
    """``e(body) <= ||K||`` for a certified shear displacer K."""
    delta = check_positive(delta, "delta")
    i = body.best_plane()
    r = body.plane_radius(i)
    if not np.isfinite(r):
        raise InputError("body has no bounded planar projection")
    if r == 0.0:
        return CapacityEstimate("e", lower=0.0, upper=delta, witness=None, witness_id="degenerate(r=0)",
                                provenance="empty interior")
    K = shear_displacer(r, delta, plane=i, dim=body.dim, rest_radius=body.rest_radius(i))
    info = {}
    if certify:
        ok, info = certify_shear(K, r, n_boundary=n_boundary)
        if not ok:
            raise CertificationError(f"displacement not certified: {info}")
    return CapacityEstimate("e", upper=K.norm, witness=K, witness_id=f"shear(plane={i},r={r:.12g},norm={K.norm:.12g})",
                            provenance="shear displacer", tol=delta, info=info)


# --------------------------------------------------------------------------
# spectral capacity


def _family(area, delta, dim, n_family):
    """Simple radial Hamiltonians supported in ``pi |x|^2 < area``."""
    out = []
    heights = np.linspace(area / n_family, area - delta, n_family)
    for h in heights:
        out.append(("admissible", admissible_bump(area, area - h, dim)))
    w = delta / 8.0
    for factor in (1.5, 3.0):
        prof = ProfileFunction.bump(factor * area, w, area - w, corner=w)
        out.append(("steep", RadialHamiltonian(prof, dim)))
    return out


def spectral_capacity(body, engine=None, n_family=6, delta=0.02, e_estimate=None):
    """``c_sigma`` lower bound from selector values of simple H in the body.

    Selector values are computed with the displacement bound of the
    inscribed ball's shear; ambiguous values are left out of the sup.
    """
    from .selector import select

    r = body.inscribed_radius()
    area = np.pi * r * r
    if area <= delta:
        est = CapacityEstimate("c_sigma", lower=0.0, witness=None, witness_id="no_simple_H",
                               provenance="empty interior")
        if e_estimate is not None:
            est.upper = e_estimate.upper
        return est
    bound = displacement_upper(Ball(r, 2), delta).upper
    eng = engine or (lambda H: select(H, displacement_bound=bound)[0])
    best, best_id, witness, values, skipped = 0.0, "", None, [], 0
    for kind, H in _family(area, delta, body.dim, n_family):
        try:
            v = float(eng(H))
        except AmbiguousBranch:
            skipped += 1
            continue
        values.append(v)
        if v > best:
            best, best_id, witness = v, f"{kind}_bump(max={H.profile.max():.6g})", H
    est = CapacityEstimate("c_sigma", lower=best, witness=witness, witness_id=best_id,
                           provenance="selector on simple family", info={"values": values, "ambiguous": skipped})
    if e_estimate is not None:
        est.upper = e_estimate.upper
    return est


# --------------------------------------------------------------------------
# chain


@dataclass
class ChainReport:
    body: str
    estimates: dict
    comparisons: list
    ok: bool

    def rows(self):
        return [self.estimates[q].row(self.body) for q in QUANTITIES]

    def to_csv(self, header=""):
        lines = [header.rstrip("\n")] if header else []
        lines.append("body,quantity,lower,upper,witness_id")
        lines += self.rows()
        lines.append("# comparisons: left,right,lower_left,upper_right,margin")
        for c in self.comparisons:
            lines.append("# " + ",".join(str(x) if isinstance(x, str) else f"{x:.12g}" for x in c))
        return "\n".join(lines) + "\n"


def verify_chain(body, delta=0.02, engine=None, eta=1e-3, n_family=6):
    """Bounds for ``c_G <= c_HZ <= c_HZ^o <= c_sigma <= e`` and ``c_sigma <= c_sigma_hat``.

    Each quantity's lower bound is the best witness on its left and its
    upper bound the best displacer on its right.  ``c_sigma_hat`` is
    bounded by the displacement energy of the neighbourhood
    ``(1 + eta) body``.
    """
    est = {}
    est["c_G"] = gromov_lower(body)
    hz = hz_lower_radial(body, delta) if np.pi * body.inscribed_radius() ** 2 > delta else \
        CapacityEstimate("c_HZ", lower=0.0, witness_id="none")
    est["c_HZ"] = hz
    est["c_HZ^o"] = CapacityEstimate("c_HZ^o", lower=hz.lower, witness=hz.witness, witness_id=hz.witness_id,
                                     provenance="every loop in R^2n is contractible")
    e = displacement_upper(body, delta)
    est["e"] = e
    est["c_sigma"] = spectral_capacity(body, engine=engine, delta=delta, e_estimate=e, n_family=n_family)
    e_nbhd = displacement_upper(body.scaled(1 + eta), delta) if body.inscribed_radius() > 0 else e
    est["c_sigma_hat"] = CapacityEstimate("c_sigma_hat", lower=est["c_sigma"].lower, upper=e_nbhd.upper,
                                          witness_id=e_nbhd.witness_id, provenance=f"e((1+{eta:g}) body)")
    order = ["c_G", "c_HZ", "c_HZ^o", "c_sigma", "e"]
    own_lower = {q: est[q].lower for q in QUANTITIES}
    # push lower bounds right and upper bounds left
    for a, b in zip(order, order[1:]):
        est[b].lower = max(est[b].lower, est[a].lower)
    est["c_sigma_hat"].lower = max(est["c_sigma_hat"].lower, est["c_sigma"].lower)
    for a, b in zip(reversed(order[:-1]), reversed(order[1:])):
        est[a].upper = min(est[a].upper, est[b].upper)
    comps = []
    for a, b in zip(order, order[1:]):
        comps.append((a, b, own_lower[a], est[b].upper, est[b].upper - own_lower[a]))
    comps.append(("c_sigma", "c_sigma_hat", own_lower["c_sigma"], est["c_sigma_hat"].upper,
                  est["c_sigma_hat"].upper - own_lower["c_sigma"]))
    ok = all(c[4] >= -1e-9 for c in comps) and all(est[q].consistent for q in QUANTITIES)
    return ChainReport(body.name, est, comps, ok)


# --------------------------------------------------------------------------
# epsilon classes


def shelf_hamiltonian(area, eps, dim=2, height_frac=0.3, shelf_frac=None):
    """Admissible radial H in the eps-class, supported in ``pi |x|^2 < area``.

    The profile has a plateau at ``height_frac * area`` and a flat shelf at
    ``shelf_frac * eps * max H`` (default: exactly ``eps max H``).  Both
    ramps have slope at most ``max(eps, 1 - eps) height_frac / 0.36``, so the
    default ``height_frac`` keeps H admissible for every eps.
    """
    top = height_frac * area
    shelf = eps * top if shelf_frac is None else shelf_frac * eps * top
    prof = ProfileFunction.shelf(top, shelf, 0.05 * area, 0.45 * area, 0.55 * area, 0.95 * area)
    return RadialHamiltonian(prof, dim)


def epsilon_inequality_check(body, eps, delta, H=None, e_upper=None):
    """Instance of ``(1 - eps) C^{o,eps}_HZ <= c^o_HZ``.

    Builds (or takes) an admissible H in the eps-class, truncates it, and
    checks that the truncation K is admissible and simple with
    ``max K = (1 - eps) max H - delta``; K then witnesses
    ``(1 - eps) max H - delta <= c^o_HZ <= e``.
    """
    r = body.inscribed_radius()
    area = np.pi * r * r
    H = H if H is not None else shelf_hamiltonian(area, eps, body.dim)
    top_h = H.profile.max()
    admissible_h = is_admissible_radial(H.profile)
    K = epsilon_truncate(H, eps, delta)
    target = (1 - eps) * top_h - delta
    rep = classify_simple(K)
    admissible_k = is_admissible_radial(K.profile)
    e_up = e_upper if e_upper is not None else displacement_upper(body, 0.02).upper
    ok = (admissible_h and admissible_k and rep.is_simple and abs(K.max_value - target) <= 1e-12
          and abs(rep.max_value - target) <= 1e-9 and K.max_value <= e_up + 1e-9)
    return {"eps": eps, "delta": delta, "max_H": top_h, "max_K": K.max_value, "target": target,
            "max_error": abs(K.max_value - target), "admissible_H": admissible_h, "admissible_K": admissible_k,
            "simple_K": rep.is_simple, "e_upper": e_up, "margin": e_up - K.max_value, "ok": bool(ok), "K": K}
