"""Reproducible output files: a version/config header line, then text or CSV."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io as _io
from pathlib import Path

import numpy as np

__all__ = [
    "config_digest",
    "header_line",
    "write_text",
    "write_csv",
    "read_field_csv",
    "field_rows",
    "format_value",
    "record_to_text",
]


def _version():
    from . import __version__

    return __version__


def config_digest(sections, seed=None):
    """sha256 over a canonical rendering of ``{section: {key: value}}`` and the seed."""
    lines = []
    for name in sorted(sections):
        for key in sorted(sections[name]):
            lines.append(f"{name}.{key}={str(sections[name][key]).strip()}")
    if seed is not None:
        lines.append(f"seed={int(seed)}")
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def header_line(digest):
    return f"# harmball {_version()} config-sha256={digest}\n"


def format_value(val):
    if isinstance(val, (bool, np.bool_)):
        return "true" if val else "false"
    if isinstance(val, (float, np.floating)):
        return f"{float(val):.17g}"
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    if isinstance(val, np.ndarray):
        return " ".join(format_value(v) for v in val.ravel())
    if isinstance(val, (tuple, list)):
        return " ".join(format_value(v) for v in val)
    if val is None:
        return "none"
    return str(val)


def record_to_text(record, skip=()):
    """``key = value`` lines for a dataclass instance (arrays and ``skip`` fields omitted)."""
    out = []
    for f in dataclasses.fields(record):
        val = getattr(record, f.name)
        if f.name in skip or (isinstance(val, np.ndarray) and val.size > 16):
            continue
        out.append(f"{f.name} = {format_value(val)}")
    return "\n".join(out) + "\n"


def write_text(path, digest, body):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(header_line(digest) + body)
    return path


def write_csv(path, digest, columns, rows):
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return write_text(path, digest, buf.getvalue())


def field_rows(u):
    return [(i, *row) for i, row in enumerate(np.asarray(u))]


def read_field_csv(path):
    """Read a field CSV written by :func:`write_csv` (header comment and column row skipped)."""
    rows = [r for r in csv.reader(Path(path).read_text().splitlines()) if r and not r[0].startswith("#")]
    body = rows[1:]
    idx = np.array([int(r[0]) for r in body])
    val = np.array([[float(x) for x in r[1:]] for r in body])
    out = np.empty_like(val)
    out[idx] = val
    return out
