"""Approximate action selector by spectral continuation along ``tau -> tau H``.

The selector value of ``tau H`` must lie in the spectrum of ``tau H`` and
move continuously with tau, starting from ``sigma(0) = 0``.  The engine
follows spectral branches over a tau grid.  Between snapshots every entry
is matched to its predecessor through ``value - dtau * slope`` (the slope
of a branch is ``int H`` along its orbit).  When another branch crosses the
tracked one, both continuations are explored depth first, and each path is
pruned as soon as it violates

* ``sigma(tau H) <= tau E^+(H)``,
* ``sigma(tau H) > 0`` for simple nonzero H,
* ``sigma(tau H) = tau max H`` while ``tau H`` is admissible and simple,
* ``sigma(tau H) <= ||K||`` for a certified displacer K of ``supp H``
  (optional; this is a consequence of the axioms, not an extra one).

If feasible paths end at different values the result is reported as an
:class:`AmbiguousBranch` carrying the candidates; nothing is chosen
silently.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import AmbiguousBranch, InputError
from .hamiltonians import (RadialHamiltonian, ReparametrizedHamiltonian, SharpHamiltonian, classify_simple,
                           compose_sharp, e_plus, hofer_norm, is_admissible_radial, scale)
from .spectrum import radial_profile_of, radial_spectrum_oracle, spectrum as search_spectrum

# event codes written to traces
START_ZERO = "START_ZERO"
START_AS2PLUS = "START_AS2PLUS"
START_SMALL = "START_SMALL"
STEP = "STEP"
CROSS_STAY = "CROSS_STAY"
CROSS_SWITCH = "CROSS_SWITCH"
PRUNE_AS3 = "PRUNE_AS3"
PRUNE_AS2 = "PRUNE_AS2"
PRUNE_AS2PLUS = "PRUNE_AS2PLUS"
PRUNE_DISPLACEMENT = "PRUNE_DISPLACEMENT"
DEATH = "DEATH"
AMBIGUOUS = "AMBIGUOUS"


@dataclass
class SelectorTrace:
    """Record of one continuation path.

    ``rows`` holds ``(tau, spectrum values, selected value, event code)``;
    ``pruned`` lists ``(tau, value, code)`` of abandoned alternatives.
    """

    rows: list = field(default_factory=list)
    pruned: list = field(default_factory=list)

    @property
    def taus(self):
        return np.array([r[0] for r in self.rows])

    @property
    def selected(self):
        return np.array([r[2] for r in self.rows])

    @property
    def events(self):
        return [(r[0], r[3]) for r in self.rows if r[3] != STEP]

    def to_csv(self, path=None, header=""):
        lines = [header.rstrip("\n")] if header else []
        lines.append("tau,selected,event,spectrum")
        for tau, vals, sel, code in self.rows:
            spec = " ".join(f"{v:.10e}" for v in vals)
            lines.append(f"{tau:.12f},{sel:.12e},{code},{spec}")
        for tau, v, code in self.pruned:
            lines.append(f"{tau:.12f},{v:.12e},{code},")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


class SpectrumProvider:
    """Spectra of ``tau H`` with per-tau caching.

    Radial inputs (including radial compositions) use the closed-form
    oracle.  Reparametrized radial inputs use the oracle of the base after
    a one-off check that the searched spectrum at tau = 1 matches it.
    Anything else falls back to orbit search on ``tau H``.
    """

    def __init__(self, H, search_kw=None, verify_tol=1e-8):
        self.H = H
        self.search_kw = dict(search_kw or {})
        self._cache = {}
        self.window = None  # callable tau -> (lo, hi) of useful actions, set by select
        self.mode = "search"
        self.profile = radial_profile_of(H)
        if self.profile is not None:
            self.mode = "oracle"
        elif isinstance(H, ReparametrizedHamiltonian) and radial_profile_of(H.H) is not None:
            self.profile = radial_profile_of(H.H)
            self.mode = "oracle-verified"
            self.verification = self._verify_reparametrized(verify_tol)
            if not self.verification["ok"]:
                self.mode = "search"
                self.profile = None

    def _verify_reparametrized(self, tol):
        oracle = radial_spectrum_oracle(self.profile)
        found = search_spectrum(self.H, **self.search_kw)
        worst = 0.0
        for e in found:
            worst = max(worst, float(np.min(np.abs(oracle.values - e.value))))
        missing = [e.value for e in oracle if not e.degenerate and e.kind == "orbit"
                   and not found.contains(e.value, 1e-6)]
        return {"ok": worst <= tol and not missing, "worst": worst, "missing": missing}

    def __call__(self, tau):
        key = round(float(tau), 14)
        if key not in self._cache:
            if self.profile is not None:
                win = self.window(tau) if self.window is not None else None
                spec = radial_spectrum_oracle(self.profile, tau, window=win)
            else:
                spec = search_spectrum(scale(self.H, tau), **self.search_kw)
                if tau != 0.0:
                    for e in spec.entries:
                        e.slope = e.slope / tau
            self._cache[key] = spec
        return self._cache[key]


@dataclass
class _Facts:
    e_plus: float
    max_h: float
    simple: bool
    nonzero: bool
    tau_admissible: float
    displacement_bound: object


def _facts(H, displacement_bound):
    prof = radial_profile_of(H)
    base = H.H if isinstance(H, ReparametrizedHamiltonian) else H
    bprof = radial_profile_of(base)
    ep = e_plus(H)
    simple, max_h, tau_adm = False, float("nan"), 0.0
    if bprof is not None:
        rad = RadialHamiltonian(bprof, base.dim)
        rep = classify_simple(rad)
        simple = rep.is_simple
        max_h = rep.max_value
        slope = bprof.sup_abs_slope()
        tau_adm = np.inf if slope == 0 else 1.0 / slope
    elif H.autonomous:
        try:
            rep = classify_simple(H)
            simple, max_h = rep.is_simple, rep.max_value
        except Exception:
            pass
    del prof
    return _Facts(ep, max_h, simple, bool(abs(ep) > 0 or simple and max_h > 0), tau_adm, displacement_bound)


def _check(facts, tau, v, tol):
    """Return ``None`` if ``v`` is admissible at ``tau``, else a prune code."""
    if v > tau * facts.e_plus + 1e-9:
        return PRUNE_AS3
    if facts.simple and facts.nonzero and tau > 0 and v <= tol:
        return PRUNE_AS2
    if facts.simple and tau * 1.0 < facts.tau_admissible and tau > 0:
        if abs(v - tau * facts.max_h) > 1e-7 * max(1.0, abs(facts.max_h)):
            return PRUNE_AS2PLUS
    if facts.displacement_bound is not None and v > facts.displacement_bound + 1e-9:
        return PRUNE_DISPLACEMENT
    return None


def _match(prev_spec, spec, dtau):
    """Map each entry of ``spec`` to its predecessor index in ``prev_spec``."""
    pv = prev_spec.values
    ps = np.array([e.slope for e in prev_spec.entries])
    out = []
    for e in spec.entries:
        back = e.value - dtau * e.slope
        err = np.abs(pv - back) + 0.5 * dtau * np.abs(ps - e.slope)
        out.append(int(np.argmin(err)))
    return out


class _Engine:
    def __init__(self, provider, facts, tau_start, tau_end, steps, tol, min_dtau, max_paths):
        self.provider, self.facts = provider, facts
        self.tau_start, self.tau_end = tau_start, tau_end
        self.grid = np.linspace(tau_start, tau_end, steps + 1)
        self.tol, self.min_dtau, self.max_paths = tol, min_dtau, max_paths
        self.memo = {}
        self.pruned = []

    def _step(self, tau, v, m, tau_next):
        """Advance one (sub)step; returns list of (tau_next, v, m, code) or raises for ambiguity."""
        dtau = tau_next - tau
        spec = self.provider(tau_next)
        pred = v + dtau * m
        vals = spec.values
        slopes = np.array([e.slope for e in spec.entries])
        err = np.abs(vals - pred) + 0.5 * dtau * np.abs(slopes - m)
        order = np.argsort(err)
        best = int(order[0])
        second = float(err[order[1]]) if len(order) > 1 else np.inf
        scale_ = max(1.0, abs(v))
        if err[best] > 0.1 * second or err[best] > 1e-3 * scale_ + 50 * dtau * dtau * scale_:
            return None  # step too large to match reliably
        out = [(tau_next, float(vals[best]), float(slopes[best]), STEP, best)]
        # crossings: branches on the other side of the tracked one
        prev = self.provider(tau)
        links = _match(prev, spec, dtau)
        pv = prev.values
        for i, e in enumerate(spec.entries):
            if i == best:
                continue
            before = pv[links[i]] - v
            after = e.value - vals[best]
            if before * after < 0 or (abs(after) <= self.tol and abs(before) > self.tol):
                out.append((tau_next, float(e.value), float(e.slope), CROSS_SWITCH, i))
        if len(out) > 1:
            out[0] = out[0][:3] + (CROSS_STAY, best)
        return out

    def _advance(self, tau, v, m, tau_b):
        """All continuations from (tau, v, m) to tau_b; list of (v, m, path rows)."""
        results = []
        stack = [(tau, v, m, [])]
        while stack:
            t, vv, mm, rows = stack.pop()
            if t >= tau_b - 1e-15:
                results.append((vv, mm, rows))
                continue
            dt = tau_b - t
            res = None
            while res is None:
                if dt < self.min_dtau:
                    raise AmbiguousBranch(f"branches cannot be separated near tau={t:.6g}", candidates=[vv],
                                          trace=rows)
                res = self._step(t, vv, mm, t + dt)
                if res is None:
                    dt *= 0.5
            for (tn, vn, mn, code, idx) in res:
                bad = _check(self.facts, tn, vn, self.tol)
                if bad is not None:
                    self.pruned.append((tn, vn, bad))
                    continue
                stack.append((tn, vn, mn, rows + [(tn, vn, code)]))
        return results

    def run(self, v0, m0):
        """Depth-first exploration on the base grid with memoized states."""
        finals = {}
        best_path = {}
        frontier = [(0, v0, m0, [(self.grid[0], v0, START_SMALL)])]
        seen = set()
        n_paths = 0
        while frontier:
            j, v, m, rows = frontier.pop()
            key = (j, round(v, 9))
            if key in seen:
                continue
            seen.add(key)
            if j == len(self.grid) - 1:
                k = round(v, 7)
                finals.setdefault(k, v)
                best_path.setdefault(k, rows)
                continue
            conts = self._advance(self.grid[j], v, m, self.grid[j + 1])
            n_paths += len(conts)
            if n_paths > self.max_paths:
                raise AmbiguousBranch("too many branch crossings to explore", candidates=list(finals.values()))
            # explore "stay" first so the primary trace follows the tracked branch
            for vv, mm, r in sorted(conts, key=lambda c: [code for _, _, code in c[2]].count(CROSS_SWITCH),
                                    reverse=True):
                frontier.append((j + 1, vv, mm, rows + r))
        return finals, best_path


def select(H, steps=64, displacement_bound=None, provider=None, tol=1e-9, min_dtau=1e-7,
           max_paths=20000, search_kw=None):
    """Selector value of ``H`` by continuation from ``sigma(0) = 0``.

    Parameters
    ----------
    H : Hamiltonian
    steps : int
        Base tau grid size (steps are halved adaptively).
    displacement_bound : float, optional
        ``||K||`` of a certified displacer of ``supp H``.

    Returns
    -------
    value : float
    trace : SelectorTrace

    Raises
    ------
    AmbiguousBranch
        With all feasible end values when the constraints do not decide.
    """
    trace = SelectorTrace()
    if getattr(H, "is_zero", False) or (radial_profile_of(H) is not None and _is_zero_profile(radial_profile_of(H))):
        trace.rows.append((1.0, (0.0,), 0.0, START_ZERO))
        return 0.0, trace
    provider = provider or SpectrumProvider(H, search_kw)
    facts = _facts(H, displacement_bound)
    if provider.window is None:
        # actions outside [0, tau E^+] (simple H) or above tau E^+ can never be selected
        pad = 0.05 * max(1.0, abs(facts.e_plus))
        low = -pad if facts.simple else -np.inf
        provider.window = lambda tau: (low, tau * facts.e_plus + pad)
    if facts.simple and facts.tau_admissible > 1.0:
        # tau H is admissible and simple for every tau in (0, 1]
        for tau in np.linspace(0.0, 1.0, steps + 1):
            vals = tuple(provider(tau).values) if tau in (0.0, 1.0) else ()
            trace.rows.append((float(tau), vals, float(tau * facts.max_h), START_AS2PLUS if tau == 0 else STEP))
        value = facts.max_h
        spec = provider(1.0)
        if not spec.contains(value, 1e-6):
            raise AmbiguousBranch("pinned value is not in the computed spectrum", candidates=[value], trace=trace)
        return float(value), trace

    tau0 = 0.5 * facts.tau_admissible if facts.tau_admissible > 0 else 1e-3
    tau0 = min(tau0, 0.5)
    spec0 = provider(tau0)
    if facts.simple:
        v0 = tau0 * facts.max_h
        e = spec0.nearest(v0)
        code0 = START_AS2PLUS
    else:
        e = max(spec0.entries, key=lambda en: (en.slope, en.value))
        v0 = e.value
        code0 = START_SMALL
    m0 = e.slope
    engine = _Engine(provider, facts, tau0, 1.0, steps, tol, min_dtau, max_paths)
    finals, paths = engine.run(float(e.value), float(m0))
    trace.pruned = engine.pruned
    if not finals:
        raise AmbiguousBranch("no continuation satisfies the constraints", candidates=[], trace=trace)
    key = sorted(finals)[0]
    rows = paths[key]
    rows[0] = (rows[0][0], rows[0][1], code0)
    for tau, v, code in rows:
        trace.rows.append((float(tau), tuple(provider(tau).values), float(v), code))
    if len(finals) > 1:
        cands = sorted(finals.values())
        trace.rows.append((1.0, tuple(provider(1.0).values), float("nan"), AMBIGUOUS))
        raise AmbiguousBranch(f"{len(cands)} feasible end values", candidates=cands, trace=trace)
    return float(finals[key]), trace


def _is_zero_profile(p):
    v = getattr(p, "values", None)
    return v is not None and not np.any(v) and not np.any(getattr(p, "slopes", 1))


class ActionSelector(BaseEstimator):
    """Estimator-style wrapper around :func:`select`.

    After ``fit(H)``: ``value_`` (nan if ambiguous), ``interval_``,
    ``status_`` in {"ok", "ambiguous"} and ``trace_``.
    """

    def __init__(self, steps=64, displacement_bound=None, tol=1e-9):
        self.steps = steps
        self.displacement_bound = displacement_bound
        self.tol = tol

    def fit(self, H, y=None):
        try:
            v, tr = select(H, steps=self.steps, displacement_bound=self.displacement_bound, tol=self.tol)
            self.value_, self.interval_, self.status_, self.trace_ = v, (v, v), "ok", tr
        except AmbiguousBranch as exc:
            self.value_, self.interval_, self.status_, self.trace_ = float("nan"), exc.interval, "ambiguous", exc.trace
        return self

    def predict(self, Hs):
        return np.array([self.fit(H).value_ for H in Hs])


# --------------------------------------------------------------------------
# axiom verification


@dataclass
class AxiomRow:
    instance: str
    axiom: str
    status: str
    margin: float
    note: str = ""


def _safe_select(engine, H):
    try:
        return engine(H), None
    except AmbiguousBranch as exc:
        return None, exc


def default_engine(H, displacement_bound=None):
    return select(H, displacement_bound=displacement_bound)[0]


def verify_axioms(suite, engine=None, as4_eta=1e-3):
    """Check (AS1)-(AS5) and (AS2+) on ``(name, H, K, bounds)`` instances.

    ``bounds`` maps Hamiltonians to certified displacement bounds (may be
    empty); ``K`` is the second argument for (AS5).  Returns a list of
    :class:`AxiomRow`; ambiguous selector values give "inconclusive".
    """
    rows = []
    for inst in suite:
        name, H, K = inst[0], inst[1], inst[2]
        bounds = inst[3] if len(inst) > 3 else {}
        eng = engine or (lambda G, b=bounds: default_engine(G, b.get(id(G))))
        sH, err = _safe_select(eng, H)
        if err is not None:
            for ax in ("AS1", "AS2", "AS2+", "AS3", "AS4", "AS5"):
                rows.append(AxiomRow(name, ax, "inconclusive", float("nan"), f"ambiguous {err.interval}"))
            continue
        prof = radial_profile_of(H)
        spec = radial_spectrum_oracle(prof) if prof is not None else search_spectrum(H)
        dist = float(np.min(np.abs(spec.values - sH)))
        rows.append(AxiomRow(name, "AS1", "pass" if dist <= 1e-6 else "fail", 1e-6 - dist))
        rep = classify_simple(H) if H.autonomous else None
        if rep is not None and rep.is_simple and rep.max_value > 0:
            rows.append(AxiomRow(name, "AS2", "pass" if sH > 0 else "fail", sH))
        else:
            rows.append(AxiomRow(name, "AS2", "n/a", float("nan"), "not simple"))
        if rep is not None and rep.is_simple and prof is not None and is_admissible_radial(prof):
            gap = abs(sH - rep.max_value)
            rows.append(AxiomRow(name, "AS2+", "pass" if gap <= 1e-3 else "fail", 1e-3 - gap))
        else:
            rows.append(AxiomRow(name, "AS2+", "n/a", float("nan"), "not admissible simple"))
        ep = e_plus(H)
        rows.append(AxiomRow(name, "AS3", "pass" if sH <= ep + 1e-9 else "fail", ep - sH))
        # C^0 probe: |sigma(H') - sigma(H)| <= int max |H' - H| with H' = (1 + eta) H
        Hp = scale(H, 1 + as4_eta)
        sHp, err4 = _safe_select(eng, Hp)
        if err4 is not None:
            rows.append(AxiomRow(name, "AS4", "inconclusive", float("nan"), f"ambiguous {err4.interval}"))
        else:
            bound = as4_eta * hofer_bound_c0(H)
            rows.append(AxiomRow(name, "AS4", "pass" if abs(sHp - sH) <= bound + 1e-9 else "fail",
                                 bound - abs(sHp - sH)))
        HK = compose_sharp(H, K)
        if isinstance(HK, SharpHamiltonian) and HK._commuting():
            HK = HK.as_radial()
        sHK, err5 = _safe_select(eng, HK)
        if err5 is not None:
            rows.append(AxiomRow(name, "AS5", "inconclusive", float("nan"), f"ambiguous {err5.interval}"))
        else:
            rhs = sH + e_plus(K)
            rows.append(AxiomRow(name, "AS5", "pass" if sHK <= rhs + 1e-9 else "fail", rhs - sHK))
    return rows


def hofer_bound_c0(H):
    """``int_0^1 max_x |H(t, x)| dt``."""
    from .hamiltonians import _time_quadrature

    return float(_time_quadrature(H, lambda t: max(abs(v) for v in H.slice_extrema(t))))


def displaced_invariance_check(H, K, displacement_ok, engine=None, taus=(0.5, 1.0), search=True, n_cloud=512,
                               seed=0):
    """sigma(H) <= ||K|| for a certified displacer K of supp H.

    With ``search`` the composition ``phi_{tau H} o phi_K`` is also
    evaluated on a random cloud in ``supp H`` for the sampled tau: a fixed
    point there would give an orbit of ``tau H # K`` inside the support, so
    the minimal displacement of the cloud must stay positive.
    """
    from .flows import flow_map

    if not displacement_ok:
        raise InputError("displacement precondition failed")
    norm = hofer_norm(K)
    eng = engine or (lambda G: select(G)[0])
    report = {"hofer_norm": norm, "tau_checks": []}
    if search and not getattr(H, "is_zero", False):
        R = H.support_radius
        rng = np.random.default_rng(seed)
        U = rng.standard_normal((n_cloud, H.dim))
        X = U / np.linalg.norm(U, axis=1, keepdims=True) * (R * rng.random(n_cloud) ** (1.0 / H.dim))[:, None]
        Y = flow_map(K, X)
        for tau in taus:
            Z = flow_map(scale(H, tau), Y)
            report["tau_checks"].append((tau, float(np.min(np.linalg.norm(Z - X, axis=1)))))
    try:
        s = eng(H)
        report.update(sigma=s, status="pass" if s <= norm + 1e-6 else "fail", margin=norm - s)
    except AmbiguousBranch as exc:
        lo, hi = exc.interval
        report.update(sigma=float("nan"), interval=(lo, hi),
                      status="pass" if hi <= norm + 1e-6 else "inconclusive", margin=norm - hi)
    if any(c[1] <= 0.0 for c in report["tau_checks"]):
        report["status"] = "fail"
    return report


def reparametrization_invariance(H, lam, engine=None, tol=1e-6):
    """sigma(H^lambda) = sigma(H) within ``tol``."""
    from .hamiltonians import reparametrize

    eng = engine or (lambda G: select(G)[0])
    Hl = reparametrize(H, lam)
    a, ea = _safe_select(eng, H)
    b, eb = _safe_select(eng, Hl)
    if ea is not None or eb is not None:
        return {"status": "inconclusive", "sigma": a, "sigma_lambda": b}
    return {"status": "pass" if abs(a - b) <= tol else "fail", "sigma": a, "sigma_lambda": b,
            "difference": abs(a - b)}
