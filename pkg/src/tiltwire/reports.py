"""Plain CSV/JSON writers with a fixed header of run settings.

Floats are written with ``repr``, which round-trips exactly, so two runs
with the same inputs produce byte-identical files.
"""

import csv
import io
import json
import math

from .quadrature import DEFAULT_ORDER
from .solver import DEFAULT_J, DEFAULT_K, TOL_ROOT

DEFAULTS = {"J": DEFAULT_J, "K": DEFAULT_K, "tol_root": TOL_ROOT, "quad_order": DEFAULT_ORDER}


def fmt(value):
    """Text form of one table cell."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return f"{value.real!r}{value.imag:+}j"
    return str(value)


def _jsonable(value):
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


def header_lines(settings):
    lines = ["# defaults: " + " ".join(f"{k}={fmt(v)}" for k, v in DEFAULTS.items())]
    lines.append("# run: " + " ".join(f"{k}={fmt(v)}" for k, v in settings.items()))
    return lines


def csv_text(columns, rows, settings, notes=()):
    """CSV with ``#`` comment lines for the settings, then one header row."""
    buf = io.StringIO()
    for line in header_lines(settings):
        buf.write(line + "\n")
    for note in notes:
        buf.write(f"# {note}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def json_text(payload, settings):
    doc = {"defaults": DEFAULTS, "run": settings}
    doc.update(payload)
    return json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
