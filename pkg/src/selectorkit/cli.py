"""Command line front end.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 a suite
assertion failed.  Every output file starts with a ``#`` header holding the
version, seed, tolerances and the configuration echo.
"""

import argparse
import sys

import numpy as np

from . import __version__
from .config import load_config, load_hamiltonian
from .exceptions import (AmbiguousBranch, CertificationError, ConvergenceError, FlowEscapeError, InputError,
                         StepSizeError)
from .reporting import csv_text, header, write_report

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_ASSERT = 0, 2, 3, 4


def _config(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    return cfg


def _emit(args, cfg, body, extra=()):
    text = write_report(args.out, header(_command_line(args), cfg, extra=extra), body)
    if args.out is None:
        sys.stdout.write(text)
    return text


def _command_line(args):
    skip = {"func", "config", "out", "seed", "workers", "svg"}
    parts = [args.command] + [f"--{k}={v}" for k, v in sorted(vars(args).items())
                              if k not in skip and k != "command" and v is not None and v is not False]
    return " ".join(parts)


def _bounces(text):
    try:
        if ".." in text:
            a, b = text.split("..")
            return range(int(a), int(b) + 1)
        return [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise InputError(f"bounces must look like '2..6' or '2,3,4', got {text!r}") from exc


# --------------------------------------------------------------------------
# subcommands


def cmd_spectrum(args):
    from .spectrum import radial_profile_of, radial_spectrum_oracle, spectrum

    H, file_cfg = load_hamiltonian(args.hamiltonian)
    cfg = _config(args)
    cfg.sections.update({k: v for k, v in file_cfg.sections.items() if k not in cfg.sections})
    spec = spectrum(H, tol=cfg.tolerances["cluster_tol"], random_state=cfg.seed)
    cols = ["action", "multiplicity", "winding", "kind", "degenerate_flag", "residual"]
    oracle = None
    if args.oracle:
        prof = radial_profile_of(H)
        if prof is None:
            raise InputError("--oracle needs a radial Hamiltonian")
        oracle = radial_spectrum_oracle(prof)
        cols.append("oracle_distance")
    rows = []
    for e in spec:
        row = [e.value, e.multiplicity, "" if e.winding is None else int(e.winding), e.kind, int(bool(e.degenerate)),
               f"{e.residual:.3e}"]
        if oracle is not None:
            row.append(f"{float(np.min(np.abs(oracle.values - e.value))):.3e}")
        rows.append(row)
    _emit(args, cfg, csv_text(cols, rows))
    if oracle is not None:
        bad = [e for e in spec if float(np.min(np.abs(oracle.values - e.value))) > 1e-6]
        if bad:
            sys.stderr.write(f"{len(bad)} searched values disagree with the oracle\n")
            return EXIT_ASSERT
    return EXIT_OK


def cmd_verify(args):
    from .suites import ALIASES, SUITES

    args.suite = ALIASES.get(args.suite, args.suite)
    if args.suite not in SUITES:
        raise InputError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    cfg = _config(args)
    kw = {"seed": cfg.seed, "workers": cfg.workers}
    if args.suite == "chain":
        kw["delta"] = cfg.tolerances["delta"]
        if args.body:
            kw["bodies"] = tuple(args.body)
        if args.no_target:
            kw["target"] = None
    res = SUITES[args.suite](**kw)
    _emit(args, cfg, res.to_csv())
    sys.stderr.write(f"{res.name}: {'pass' if res.ok else 'fail'} ({res.summary})\n")
    return EXIT_OK if res.ok else EXIT_ASSERT


def cmd_billiard(args):
    from .billiards import lift_length_check, parse_domain, shortest_periodic, to_svg

    cfg = _config(args)
    U = parse_domain(args.domain)
    tr = shortest_periodic(U, _bounces(args.bounces), args.restarts, cfg.seed, tol=cfg.tolerances["residual_tol"])
    lift = lift_length_check(tr)
    cols = ["domain", "length", "bounces", "max_residual", "lift_gap", "critical_points"]
    rows = [[args.domain, tr.length, tr.m, f"{tr.max_residual:.3e}", f"{lift['gap']:.3e}",
             tr.info["critical_points"]]]
    body = csv_text(cols, rows) + "# vertices\n" + tr.to_csv()
    _emit(args, cfg, body)
    if args.svg:
        to_svg(U, tr, args.svg)
    return EXIT_OK


def cmd_reeb(args):
    from .contact import alpha_one, closed_characteristics, parse_surface

    cfg = _config(args)
    S = parse_surface(args.surface)
    orbits = closed_characteristics(S, args.tmax, n_seeds=args.seeds, seed=cfg.seed)
    a = alpha_one(S, args.tmax, n_seeds=args.seeds, seed=cfg.seed) if orbits else None
    cols = ["period", "action", "covers", "residual", "tangent_residual"]
    rows = [[o.period, o.action, o.covers, f"{o.residual:.3e}", f"{o.tangent_residual:.3e}"] for o in orbits]
    extra = [f"alpha_1: {a.value:.12g}" if a is not None else "alpha_1: none found below tmax"]
    _emit(args, cfg, csv_text(cols, rows), extra=extra)
    if args.svg and orbits:
        from .flows import polyline_svg

        best = min(orbits, key=lambda o: abs(o.action))
        with open(args.svg, "w") as fh:
            fh.write(polyline_svg(best.samples[:, [0, S.dim // 2]], closed=True))
    return EXIT_OK if orbits else EXIT_NUMERIC


def cmd_capacity(args):
    from .capacities import (displacement_upper, gromov_lower, hz_lower_radial, parse_body, spectral_capacity,
                             verify_chain)

    cfg = _config(args)
    body = parse_body(args.body)
    delta = cfg.tolerances["delta"]
    cols = ["body", "quantity", "lower", "upper", "witness_id"]
    if args.quantity == "chain":
        rep = verify_chain(body, delta=delta)
        _emit(args, cfg, rep.to_csv())
        return EXIT_OK if rep.ok else EXIT_ASSERT
    fns = {"c_G": lambda: gromov_lower(body), "c_HZ": lambda: hz_lower_radial(body, delta),
           "e": lambda: displacement_upper(body, delta), "c_sigma": lambda: spectral_capacity(body, delta=delta)}
    if args.quantity not in fns:
        raise InputError(f"unknown quantity {args.quantity!r}")
    est = fns[args.quantity]()
    _emit(args, cfg, csv_text(cols, [[body.name, est.quantity, est.lower, est.upper, est.witness_id]]))
    return EXIT_OK


def cmd_selector(args):
    from .selector import select

    H, _ = load_hamiltonian(args.hamiltonian)
    cfg = _config(args)
    cols = ["status", "value", "low", "high", "bound"]
    try:
        v, trace = select(H, displacement_bound=args.bound)
        rows = [["ok", v, v, v, "" if args.bound is None else args.bound]]
    except AmbiguousBranch as exc:
        trace = exc.trace
        lo, hi = exc.interval
        rows = [["ambiguous", float("nan"), lo, hi, "" if args.bound is None else args.bound]]
        sys.stderr.write(f"ambiguous: candidates {list(exc.candidates)}\n")
    body = csv_text(cols, rows)
    if args.trace and trace is not None:
        body += "# trace\n" + trace.to_csv()
    _emit(args, cfg, body)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="selectorkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"selectorkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="INI config file ([run], [tolerances], ...)")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=None)
        sp.add_argument("--out", help="output CSV path (default: stdout)")

    sp = sub.add_parser("spectrum", help="action spectrum of a configured Hamiltonian")
    sp.add_argument("--hamiltonian", required=True)
    sp.add_argument("--oracle", action="store_true", help="add the distance to the radial oracle")
    common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("--suite", required=True)
    sp.add_argument("--body", action="append", help="body spec for the chain suite (repeatable)")
    sp.add_argument("--no-target", action="store_true", help="chain suite: skip the pi window check")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("billiard", help="shortest periodic billiard trajectory")
    sp.add_argument("--domain", required=True)
    sp.add_argument("--bounces", default="2..8")
    sp.add_argument("--restarts", type=int, default=64)
    sp.add_argument("--svg")
    common(sp)
    sp.set_defaults(func=cmd_billiard)

    sp = sub.add_parser("reeb", help="closed Reeb orbits and alpha_1")
    sp.add_argument("--surface", required=True)
    sp.add_argument("--tmax", type=float, required=True)
    sp.add_argument("--seeds", type=int, default=24)
    sp.add_argument("--svg")
    common(sp)
    sp.set_defaults(func=cmd_reeb)

    sp = sub.add_parser("capacity", help="capacity bounds of a body")
    sp.add_argument("--body", required=True)
    sp.add_argument("--quantity", default="chain")
    common(sp)
    sp.set_defaults(func=cmd_capacity)

    sp = sub.add_parser("selector", help="selector value of a configured Hamiltonian")
    sp.add_argument("--hamiltonian", required=True)
    sp.add_argument("--bound", type=float, default=None, help="certified displacement bound for supp H")
    sp.add_argument("--trace", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_selector)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except OSError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT
    except (ConvergenceError, StepSizeError, CertificationError, FlowEscapeError, AmbiguousBranch) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
