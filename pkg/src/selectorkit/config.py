"""Run configuration: INI-style files, defaults and environment overrides.

Grammar (read with :mod:`configparser`)::

    [run]
    seed = 7
    workers = 1

    [tolerances]
    delta = 0.02
    cluster_tol = 1e-7

    [hamiltonian]
    kind = radial            ; radial | bump | shelf | zero
    dim = 4
    knots = 0 1.5, 0.4 1.5, 1.0 0      ; "s value" or "s value slope" pairs

Environment variables ``SELECTORKIT_WORKERS`` and
``SELECTORKIT_<TOLERANCE>`` (for example ``SELECTORKIT_DELTA``) override
the file and the defaults.
"""

import configparser
import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InputError

TOLERANCES = {
    "delta": 0.02,
    "cluster_tol": 1e-7,
    "residual_tol": 1e-7,
    "chain_margin": 1e-9,
}
ENV_PREFIX = "SELECTORKIT_"


@dataclass
class RunConfig:
    seed: int = 0
    workers: int = 1
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))
    sections: dict = field(default_factory=dict)
    source: str = ""

    def echo(self):
        """Sorted ``section.key=value`` pairs, for report headers."""
        items = [f"run.seed={self.seed}", f"run.workers={self.workers}"]
        items += [f"tolerances.{k}={v!r}" for k, v in sorted(self.tolerances.items())]
        for name in sorted(self.sections):
            if name in ("run", "tolerances"):
                continue
            items += [f"{name}.{k}={v}" for k, v in sorted(self.sections[name].items())]
        return items


def _float(value, name):
    try:
        out = float(value)
    except ValueError as exc:
        raise InputError(f"{name} must be a number, got {value!r}") from exc
    if not np.isfinite(out):
        raise InputError(f"{name} must be finite")
    return out


def load_config(path=None, text=None, env=None):
    """Read a config file (or text), apply defaults and environment overrides.

    Raises
    ------
    InputError
        Missing file, syntax errors or non-numeric tolerances.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    source = ""
    try:
        if path is not None:
            if not os.path.isfile(path):
                raise InputError(f"config file not found: {path}")
            with open(path) as fh:
                parser.read_file(fh)
            source = str(path)
        elif text is not None:
            parser.read_string(text)
    except configparser.Error as exc:
        raise InputError(f"cannot parse config: {exc}") from exc
    cfg = RunConfig(source=source)
    cfg.sections = {s: dict(parser[s]) for s in parser.sections()}
    run = cfg.sections.get("run", {})
    try:
        cfg.seed = int(run.get("seed", 0))
        cfg.workers = int(run.get("workers", 1))
    except ValueError as exc:
        raise InputError(f"bad [run] entry: {exc}") from exc
    for k, v in cfg.sections.get("tolerances", {}).items():
        if k not in TOLERANCES:
            raise InputError(f"unknown tolerance {k!r}")
        cfg.tolerances[k] = _float(v, k)
    env = os.environ if env is None else env
    if ENV_PREFIX + "WORKERS" in env:
        try:
            cfg.workers = int(env[ENV_PREFIX + "WORKERS"])
        except ValueError as exc:
            raise InputError("SELECTORKIT_WORKERS must be an integer") from exc
    for k in TOLERANCES:
        key = ENV_PREFIX + k.upper()
        if key in env:
            cfg.tolerances[k] = _float(env[key], key)
    if cfg.workers < 1:
        raise InputError("workers must be >= 1")
    return cfg


def parse_knots(text):
    """``"s v, s v [m], ..."`` into arrays (slopes None unless every knot has one)."""
    rows = []
    for chunk in text.split(","):
        parts = chunk.split()
        if not parts:
            continue
        if len(parts) not in (2, 3):
            raise InputError(f"knot entry {chunk.strip()!r} must be 's value' or 's value slope'")
        rows.append([_float(p, "knot") for p in parts])
    if len(rows) < 2:
        raise InputError("need at least two knots")
    if len({len(r) for r in rows}) != 1:
        raise InputError("either all knots carry a slope or none does")
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1], (arr[:, 2] if arr.shape[1] == 3 else None)


def hamiltonian_from_section(sec):
    """Build a radial Hamiltonian from a ``[hamiltonian]`` section mapping."""
    from .hamiltonians import RadialHamiltonian, ZeroHamiltonian
    from .profiles import ProfileFunction

    kind = sec.get("kind", "radial").strip().lower()
    try:
        dim = int(sec.get("dim", 2))
    except ValueError as exc:
        raise InputError("dim must be an integer") from exc
    if kind == "zero":
        return ZeroHamiltonian(dim)
    if kind == "radial":
        if "knots" not in sec:
            raise InputError("[hamiltonian] kind = radial needs 'knots'")
        k, v, m = parse_knots(sec["knots"])
        return RadialHamiltonian(ProfileFunction(k, v, m), dim)
    if kind == "bump":
        need = ("height", "plateau_end", "support_end")
        if any(n not in sec for n in need):
            raise InputError(f"bump needs {', '.join(need)}")
        corner = _float(sec["corner"], "corner") if "corner" in sec else None
        prof = ProfileFunction.bump(_float(sec["height"], "height"), _float(sec["plateau_end"], "plateau_end"),
                                    _float(sec["support_end"], "support_end"), corner=corner)
        return RadialHamiltonian(prof, dim)
    if kind == "shelf":
        names = ("height", "shelf_value", "plateau_end", "shelf_start", "shelf_end", "support_end")
        if any(n not in sec for n in names):
            raise InputError(f"shelf needs {', '.join(names)}")
        prof = ProfileFunction.shelf(*(_float(sec[n], n) for n in names))
        return RadialHamiltonian(prof, dim)
    raise InputError(f"unknown hamiltonian kind {kind!r}")


def load_hamiltonian(path):
    cfg = load_config(path)
    if "hamiltonian" not in cfg.sections:
        raise InputError(f"{path}: missing [hamiltonian] section")
    return hamiltonian_from_section(cfg.sections["hamiltonian"]), cfg
