"""Verification suites shared by the CLI and the acceptance tests.

Every suite is a function ``suite(seed=0, workers=1, **opts)`` returning a
:class:`SuiteResult`.  Instances are generated from the seed alone and
evaluated by picklable task functions, so the worker pool changes only the
wall time, never the report.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError
from .reporting import csv_text


@dataclass
class SuiteResult:
    name: str
    columns: tuple
    rows: list
    ok: bool
    inconclusive: int = 0
    summary: str = ""
    info: dict = field(default_factory=dict)

    def to_csv(self, head=""):
        tail = f"# status: {'pass' if self.ok else 'fail'}\n# inconclusive: {self.inconclusive}\n"
        if self.summary:
            tail += f"# summary: {self.summary}\n"
        return head + csv_text(self.columns, self.rows) + tail


def run_tasks(fn, items, workers=1):
    """Order-preserving map, serial or over a process pool."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --------------------------------------------------------------------------
# selector axioms

_BOUNDS = {}


def ball_displacement_bound(radius, dim=2, delta=0.02):
    """Certified ``||K||`` for a displacer of the closed ball of this radius (memoised)."""
    from .capacities import Ball, displacement_upper

    key = (round(float(radius), 12), dim, delta)
    if key not in _BOUNDS:
        _BOUNDS[key] = displacement_upper(Ball(radius, dim=dim), delta).upper
    return _BOUNDS[key]


def bounded_engine(G):
    """Selector value using the certified displacement bound of the support ball."""
    from .selector import select

    return select(G, displacement_bound=ball_displacement_bound(G.support_radius, G.dim))[0]


def _axiom_instances(seed, n=20):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        dim = 2 if i % 2 == 0 else 4
        A = float(rng.uniform(1, 3))
        kind = ("bump", "bump", "shelf", "steep")[i % 4]
        if kind == "bump":
            spec = (float(rng.uniform(0.2, 0.8)) * A, float(rng.uniform(0.2, 0.4)) * A, A)
        elif kind == "shelf":
            h = float(rng.uniform(0.15, 0.3)) * A
            spec = (h, 0.3 * h, 0.1 * A, 0.35 * A, 0.55 * A, 0.95 * A)
        else:
            spec = (float(rng.uniform(1.2, 2.0)) * A, float(rng.uniform(0.3, 0.5)) * A, A)
        Ak = float(rng.uniform(0.5, 2))
        kspec = (float(rng.uniform(0.1, 0.5)) * Ak, 0.4 * Ak, Ak)
        out.append((f"ax{i:02d}-{kind}-d{dim}", kind, dim, spec, kspec))
    return out


def _build_profile(kind, spec):
    from .profiles import ProfileFunction

    if kind == "shelf":
        return ProfileFunction.shelf(*spec)
    return ProfileFunction.bump(*spec)


def _axiom_task(inst):
    from .hamiltonians import RadialHamiltonian
    from .selector import verify_axioms

    name, kind, dim, spec, kspec = inst
    H = RadialHamiltonian(_build_profile(kind, spec), dim)
    K = RadialHamiltonian(_build_profile("bump", kspec), dim)
    return [(r.instance, r.axiom, r.status, r.margin, r.note) for r in verify_axioms([(name, H, K)],
                                                                                     engine=bounded_engine)]


def axioms_suite(seed=0, workers=1, n=20, **_):
    """(AS1)-(AS5) and (AS2+) on radial instances with oracle spectra."""
    rows = [r for part in run_tasks(_axiom_task, _axiom_instances(seed, n), workers) for r in part]
    fails = [r for r in rows if r[2] == "fail"]
    inc = sum(r[2] == "inconclusive" for r in rows)
    # the axioms' own tolerances are built into the pass/fail status
    ok = not fails and inc <= 0.1 * len(rows)
    return SuiteResult("axioms", ("instance", "axiom", "status", "margin", "note"), rows, ok, inc,
                       f"{len(rows)} rows, {len(fails)} fail, {inc} inconclusive")


# --------------------------------------------------------------------------
# displacement bound


def _displacement_instances(seed, n=10):
    rng = np.random.default_rng(seed + 11)
    out = []
    for i in range(n):
        dim = 2 if i < 0.6 * n else 4
        A = float(rng.uniform(0.5, 2.0))
        h = float(rng.uniform(0.3, 1.0)) * A
        out.append((f"dp{i:02d}-d{dim}", dim, (h, float(rng.uniform(0.2, 0.7)) * A, A)))
    return out


def _displacement_task(inst):
    from .capacities import certify_shear, shear_displacer
    from .hamiltonians import RadialHamiltonian
    from .selector import displaced_invariance_check, select

    name, dim, spec = inst
    H = RadialHamiltonian(_build_profile("bump", spec), dim)
    r = H.support_radius
    K = shear_displacer(r, 0.02, dim=dim, rest_radius=r)
    ok, info = certify_shear(K, r)
    # the selector runs without the displacement constraint here
    rep = displaced_invariance_check(H, K, ok, engine=lambda G: select(G)[0])
    min_disp = min(c[1] for c in rep["tau_checks"])
    sigma = rep["sigma"] if np.isfinite(rep["sigma"]) else rep["interval"][1]
    return (name, dim, sigma, rep["hofer_norm"], rep["margin"], min_disp, rep["status"])


def displacement_suite(seed=0, workers=1, n=10, **_):
    """sigma(H) <= ||K|| + 1e-6 for certified displacers K of supp H."""
    rows = run_tasks(_displacement_task, _displacement_instances(seed, n), workers)
    ok = all(r[6] == "pass" and r[4] >= -1e-6 for r in rows)
    inc = sum(r[6] == "inconclusive" for r in rows)
    return SuiteResult("displacement", ("instance", "dim", "sigma", "hofer_norm_K", "margin",
                                        "min_fixed_point_gap", "status"), rows, ok, inc,
                       f"min margin {min(r[4] for r in rows):.3g}")


# --------------------------------------------------------------------------
# spectrum search against the radial oracle


def random_profile(rng, slope_cap=(0.5, 4.0)):
    """Random radial profile with bounded slope (bounded winding numbers)."""
    from .profiles import ProfileFunction

    A = float(rng.uniform(1, 3))
    m = int(rng.integers(3, 7))
    knots = A * (np.arange(m) + np.concatenate([[0], rng.uniform(-0.3, 0.3, m - 2), [0]])) / (m - 1)
    vals = np.concatenate([rng.uniform(-1, 3, m - 1), [0]])
    p = ProfileFunction(knots, vals)
    cap = float(rng.uniform(*slope_cap))
    return ProfileFunction(knots, vals * cap / p.sup_abs_slope())


def _oracle_instances(seed, n=25):
    rng = np.random.default_rng(seed + 5)
    out = []
    for i in range(n):
        p = random_profile(rng)
        out.append((i, 2 if i % 3 else 4, p.knots.tolist(), p.values.tolist(), p.slopes.tolist()))
    return out


def _oracle_task(inst):
    from .hamiltonians import RadialHamiltonian
    from .profiles import ProfileFunction
    from .spectrum import radial_spectrum_oracle, spectrum

    i, dim, k, v, m = inst
    p = ProfileFunction(k, v, m)
    orc = radial_spectrum_oracle(p)
    found = spectrum(RadialHamiltonian(p, dim))
    worst = max(float(np.min(np.abs(orc.values - e.value))) for e in found)
    missing = [e.value for e in orc if not e.degenerate and not found.contains(e.value, 1e-6)]
    return (i, dim, p.sup_abs_slope(), len(orc), len(found), worst, len(missing),
            worst <= 1e-6 and not missing)


def oracle_suite(seed=0, workers=1, n=25, **_):
    """Searched spectrum inside the oracle spectrum; every nondegenerate oracle value found."""
    rows = run_tasks(_oracle_task, _oracle_instances(seed, n), workers)
    ok = all(r[7] for r in rows)
    return SuiteResult("oracle", ("instance", "dim", "sup_slope", "n_oracle", "n_search", "worst_distance",
                                  "n_missing", "ok"), rows, ok, 0,
                       f"worst distance {max(r[5] for r in rows):.3g}")


# --------------------------------------------------------------------------
# action functional gradient and Stokes


def _td_value(t, X, c):
    return np.exp(-np.sum(X * X, 1)) * (1 + 0.5 * np.sin(2 * np.pi * t)) + 0.1 * np.cos(2 * np.pi * t) * (X @ c)


def _td_grad(t, X, c):
    g = np.exp(-np.sum(X * X, 1))[:, None] * (1 + 0.5 * np.sin(2 * np.pi * t))
    return -2 * X * g + 0.1 * np.cos(2 * np.pi * t) * c[None, :]


def gradient_suite(seed=0, workers=1, n_triples=50, n_loops=20, **_):
    """Finite differences of the action against ``<grad A_H, v>``; quadratic part against Stokes."""
    from functools import partial

    from .flows import omega0
    from .hamiltonians import RadialHamiltonian, TimeDependentHamiltonian
    from .loops import FourierLoop, action, gradient, h12_inner, h12_norm, quadratic_action
    from .profiles import ProfileFunction

    rng = np.random.default_rng(seed + 3)
    rows = []
    ok = True
    for i in range(n_triples):
        dim = 2 if i % 2 else 4
        if i % 3 == 2:
            c = rng.standard_normal(dim)
            H = TimeDependentHamiltonian(partial(_td_value, c=c), partial(_td_grad, c=c), dim, 3.0)
            kind = "time-dependent"
        else:
            A = float(rng.uniform(1, 3))
            H = RadialHamiltonian(ProfileFunction.bump(float(rng.uniform(0.5, 2)), 0.3 * A, A), dim)
            kind = "radial"
        x = FourierLoop(0.3 * FourierLoop.random(dim, kmax=6, rng=rng).coeffs)
        v = FourierLoop.random(dim, kmax=6, rng=rng)
        N, h = 64, 1e-5
        fd = (action(H, FourierLoop(x.coeffs + h * v.coeffs), N)
              - action(H, FourierLoop(x.coeffs - h * v.coeffs), N)) / (2 * h)
        an = h12_inner(gradient(H, x, N), v)
        err = abs(fd - an)
        bound = 1e-6 * (1 + h12_norm(v))
        ok &= err <= bound
        rows.append(("gradient", i, kind, dim, fd, an, err, err <= bound))
    for i in range(n_loops):
        dim = 2 + 2 * (i % 2)
        x = FourierLoop.random(dim, kmax=8, rng=rng)
        N = 256
        X, V = x.samples(N), x.derivative(n_nodes=N)
        n = dim // 2
        # minus the capping area, from two primitives of omega0
        s1 = -0.5 * float(np.mean(omega0(X, V)))
        s2 = float(np.mean(np.einsum("ij,ij->i", X[:, n:], V[:, :n])))
        a = quadratic_action(x)
        err = max(abs(a - s1), abs(a - s2))
        ok &= err <= 1e-8
        rows.append(("stokes", i, "loop", dim, a, s1, err, err <= 1e-8))
    return SuiteResult("gradient", ("check", "instance", "kind", "dim", "value", "reference", "error", "ok"),
                       rows, bool(ok), 0, f"worst error {max(r[6] for r in rows):.3g}")


# --------------------------------------------------------------------------
# capacity chain


def _chain_task(args):
    from .capacities import parse_body, verify_chain

    spec, delta = args
    body = parse_body(spec)
    t0 = time.perf_counter()
    rep = verify_chain(body, delta=delta)
    return spec, rep, time.perf_counter() - t0


def chain_suite(seed=0, workers=1, bodies=("ball:r=1,dim=2", "ball:r=1,dim=4"), delta=0.02, target=np.pi,
                window=0.05, quantities=None, **_):
    """Capacity chain bounds; every reported bound must lie within ``window`` of ``target``."""
    from .capacities import QUANTITIES

    if isinstance(bodies, str):
        bodies = (bodies,)
    quantities = tuple(quantities or QUANTITIES)
    rows, ok, timing, worst = [], True, {}, 0.0
    for spec, rep, dt in run_tasks(_chain_task, [(b, delta) for b in bodies], workers):
        timing[spec] = dt
        ok &= rep.ok
        for q in quantities:
            est = rep.estimates[q]
            inside = (abs(est.lower - target) <= window if target is not None else True) and \
                     (abs(est.upper - target) <= window if target is not None else True)
            ok &= inside
            if target is not None:
                worst = max(worst, abs(est.lower - target), abs(est.upper - target))
            rows.append((spec, q, est.lower, est.upper, inside, est.witness_id))
        for c in rep.comparisons:
            rows.append((spec, f"{c[0]}<={c[1]}", c[2], c[3], c[4] >= -1e-9, f"margin={c[4]:.3g}"))
    return SuiteResult("chain", ("body", "quantity", "lower", "upper", "ok", "witness"), rows, bool(ok), 0,
                       f"worst distance to target {worst:.3g}" if target is not None else "",
                       info={"timing": timing})


def cylinder_suite(seed=0, workers=1, delta=0.02, **_):
    return chain_suite(seed, workers, bodies=("cylinder:r=1,dim=4",), delta=delta,
                       quantities=("c_sigma", "e"))


# --------------------------------------------------------------------------
# contact geometry


def contact_suite(seed=0, workers=1, n_points=64, **_):
    """Reeb identities, alpha_1 of E(1, 2) and conformality under thickening."""
    from .contact import alpha_one, conformality_check, ellipsoid_surface, reeb_field
    from .flows import omega0

    S = ellipsoid_surface([1.0, 2.0])
    P = S.points(n_points, seed)
    R = reeb_field(S, P)
    lam = float(np.max(np.abs(S.contact_form(P, R) - 1.0)))
    tang = float(np.max(np.abs(np.einsum("ij,ij->i", S.gauge.gradient(P), R))))
    kern = 0.0
    for x, r in zip(P, R):
        B = S.tangent_basis(x)
        kern = max(kern, float(np.max(np.abs(omega0(np.broadcast_to(r, B.shape), B)))))
    a = alpha_one(S, 2.5, seed=seed)
    conf = conformality_check(S, (0.0, 0.1, 0.2), T_max=2.5, seed=seed)
    rows = [("reeb", "lambda(R)-1", lam, 1e-8, lam <= 1e-8),
            ("reeb", "dF(R)", tang, 1e-8, tang <= 1e-8),
            ("reeb", "omega(R,T_xS)", kern, 1e-8, kern <= 1e-8),
            ("alpha_1", "E(1,2)", a.value, 1.0, abs(a.value - 1.0) <= 1e-6)]
    for t, val, pred, res in conf["rows"]:
        rows.append(("conformality", f"t={t:g}", val, pred, res <= 1e-6))
    ok = all(r[4] for r in rows)
    return SuiteResult("contact", ("check", "item", "value", "reference", "ok"), rows, ok, 0,
                       f"alpha_1 = {a.value:.12g}, {a.n_orbits} orbits up to T = 2.5")


def reeb_capacity_suite(seed=0, workers=1, delta=0.02, **_):
    """Plateau-Hamiltonian instance on the unit sphere in R^4."""
    from .contact import round_sphere, verify_reeb_bound

    rep = verify_reeb_bound(round_sphere(1.0, 4), delta=delta)
    a, hat, e = rep["alpha_1"], rep["c_sigma_hat_upper"], rep["e_upper"]
    rows = [("alpha_1", a, np.pi, abs(a - np.pi) <= 1e-6),
            ("c_sigma_hat_upper", hat, a, a <= hat + 1e-9),
            ("e_upper", e, hat, hat <= e + 1e-9),
            ("e_upper_window", e, np.pi + 0.05, e <= np.pi + 0.05),
            ("sigma", rep["sigma"], rep["C"], 0 < rep["sigma"] < rep["C"]),
            ("f(eps)", rep["f_eps"], rep["C"], 0 < rep["f_eps"] < rep["C"]),
            ("witness_winding", float(rep["winding"]), 0.0, rep["winding"] != 0),
            ("capping_action", rep["capping_action"], hat + delta, rep["capping_action"] <= hat + delta)]
    rows += [(f"check:{k}", float(v), 1.0, bool(v)) for k, v in sorted(rep["checks"].items())]
    ok = all(r[3] for r in rows) and rep["status"] == "pass"
    return SuiteResult("reeb_capacity", ("item", "value", "reference", "ok"), rows, ok, 0,
                       f"tau = {rep['tau']:.6g}, C = {rep['C']:.6g}")


# --------------------------------------------------------------------------
# epsilon classes


SHELF_PROFILES = ((0.15, 0.7), (0.2, 1.0), (0.25, 0.8), (0.3, 0.6), (0.35, 1.0))


def epsilon_class_suite(seed=0, workers=1, delta=0.01, eps_values=(0.1, 0.3, 0.5), **_):
    """Truncations of eps-class Hamiltonians: exact maximum, admissible, simple, below e."""
    from .capacities import Ball, displacement_upper, epsilon_inequality_check, shelf_hamiltonian

    body = Ball(1.0, 2)
    e_up = displacement_upper(body, 0.02).upper
    rows, ok = [], True
    for j, (hf, sf) in enumerate(SHELF_PROFILES):
        for eps in eps_values:
            H = shelf_hamiltonian(np.pi, eps, 2, height_frac=hf, shelf_frac=sf)
            rep = epsilon_inequality_check(body, eps, delta, H=H, e_upper=e_up)
            ok &= rep["ok"]
            rows.append((j, eps, rep["max_H"], rep["max_K"], rep["target"], rep["max_error"], rep["admissible_K"],
                         rep["simple_K"], rep["margin"], rep["ok"]))
    return SuiteResult("epsilon_class", ("profile", "eps", "max_H", "max_K", "target", "max_error", "admissible_K",
                                     "simple_K", "margin_to_e", "ok"), rows, bool(ok), 0,
                       f"e upper {e_up:.12g}")


# --------------------------------------------------------------------------
# billiards


BILLIARD_CASES = (("disk:r=1", 4.0, 1e-4), ("ellipse:a=2,b=1", 4.0, 1e-3), ("square:side=1,corner=0.02", 2.0, 0.02))


def _billiard_task(args):
    from .billiards import parse_domain, shortest_periodic, viterbo_bound_check

    spec, expected, tol, seed = args
    U = parse_domain(spec)
    t0 = time.perf_counter()
    tr = shortest_periodic(U, seed=seed)
    rep = viterbo_bound_check(U, tr, seed=seed)
    return (spec, tr.length, expected, abs(tr.length - expected) <= tol, tr.m, tr.max_residual,
            rep["dilation_error"], rep["ball_bound"], rep["e_upper"], rep["bound_ok"],
            rep["ratio_spread"]), time.perf_counter() - t0


def billiard_suite(seed=0, workers=1, **_):
    """Shortest periodic trajectories, reflection residuals, dilation law and the ball bound."""
    out = run_tasks(_billiard_task, [(s, e, t, seed) for s, e, t in BILLIARD_CASES], workers)
    rows = [r for r, _ in out]
    ok = all(r[3] and r[5] <= 1e-7 and r[6] <= 1e-9 and r[9] for r in rows)
    return SuiteResult("billiard", ("domain", "length", "expected", "length_ok", "bounces", "max_residual",
                                    "dilation_error", "pi_R2", "e_upper", "bound_ok", "ratio_spread"), rows,
                       bool(ok), 0, "", info={"timing": [dt for _, dt in out]})


SUITES = {
    "axioms": axioms_suite,
    "displacement": displacement_suite,
    "oracle": oracle_suite,
    "gradient": gradient_suite,
    "chain": chain_suite,
    "cylinder": cylinder_suite,
    "contact": contact_suite,
    "reeb_capacity": reeb_capacity_suite,
    "epsilon_class": epsilon_class_suite,
    "billiard": billiard_suite,
}


# older spellings accepted on the command line
ALIASES = {"theorem2": "reeb_capacity", "appendixB": "epsilon_class"}


def run_suite(name, **kw):
    name = ALIASES.get(name, name)
    if name not in SUITES:
        raise InputError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](**kw)


__all__ = ["ALIASES", "SuiteResult", "SUITES", "run_suite", "run_tasks"]
