"""CSV reports with a ``#``-prefixed metadata header.

Headers carry the package version, the seed, the tolerances and an echo of
the configuration.  They never contain timestamps or host names, so a rerun
with the same inputs is byte-identical.
"""

import csv
import io

from . import __version__


def format_value(v):
    """Stable text form: floats with 12 significant digits, everything else via ``str``."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    try:
        import numpy as np

        if isinstance(v, np.floating):
            return f"{float(v):.12g}"
        if isinstance(v, np.integer):
            return str(int(v))
        if isinstance(v, np.bool_):
            return "true" if v else "false"
    except ImportError:  # pragma: no cover
        pass
    return str(v)


def header(command, config=None, seed=None, extra=()):
    lines = [f"# selectorkit {__version__}", f"# command: {command}"]
    if config is not None:
        lines.append(f"# seed: {config.seed}")
        lines.append("# tolerances: " + ";".join(f"{k}={v!r}" for k, v in sorted(config.tolerances.items())))
        lines += [f"# config: {item}" for item in config.echo()]
    elif seed is not None:
        lines.append(f"# seed: {seed}")
    lines += [f"# {e}" for e in extra]
    return "\n".join(lines) + "\n"


def csv_text(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_value(v) for v in r])
    return buf.getvalue()


def write_report(path, head, body):
    text = head + body
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text
