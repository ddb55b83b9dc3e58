"""Scan/counts file parsing and self-describing table output."""

from __future__ import annotations

import io
import json
import math
from pathlib import Path

import numpy as np

from .estimation import CountRecord
from .fringe import FringeScan

SCAN_HEADER = ("tau_ps", "coincidences", "trials")


class ParseError(ValueError):
    pass


def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield lineno, line


def _int_field(s: str, where: str) -> int:
    try:
        v = float(s)
    except ValueError:
        raise ParseError(f"{where}: not a number: {s!r}") from None
    if not v.is_integer():
        raise ParseError(f"{where}: expected an integer count, got {s!r}")
    return int(v)


def parse_scan(text: str, name: str = "<scan>") -> FringeScan:
    """Parse ``tau_ps,coincidences,trials`` CSV; ``#`` lines are comments."""
    rows = []
    header_seen = False
    for lineno, line in _data_lines(text):
        fields = [f.strip() for f in line.split(",")]
        where = f"{name}:{lineno}"
        if not header_seen:
            header_seen = True
            if tuple(fields) == SCAN_HEADER:
                continue
            raise ParseError(f"{where}: expected header {','.join(SCAN_HEADER)}")
        if len(fields) != 3:
            raise ParseError(f"{where}: expected 3 fields, got {len(fields)}")
        try:
            tau = float(fields[0])
        except ValueError:
            raise ParseError(f"{where}: not a number: {fields[0]!r}") from None
        if not math.isfinite(tau):
            raise ParseError(f"{where}: tau must be finite")
        k = _int_field(fields[1], where)
        n = _int_field(fields[2], where)
        if not (0 <= k <= n and n >= 1):
            raise ParseError(f"{where}: need trials >= coincidences >= 0 and trials >= 1")
        if rows and tau <= rows[-1][0]:
            raise ParseError(f"{where}: tau must be strictly increasing")
        rows.append((tau, k, n))
    if not rows:
        raise ParseError(f"{name}: no samples")
    tau, k, n = zip(*rows)
    return FringeScan(np.array(tau), np.array(k), np.array(n))


def read_scan(path) -> FringeScan:
    return parse_scan(Path(path).read_text(), str(path))


def format_scan(scan: FringeScan) -> str:
    out = [",".join(SCAN_HEADER)]
    for t, k, n in zip(scan.tau, scan.coincidences, scan.trials):
        out.append(f"{fmt(t)},{int(k)},{int(n)}")
    return "\n".join(out) + "\n"


def parse_counts(text: str, name: str = "<counts>") -> CountRecord:
    """Parse a single ``n0,n1,n2`` line (comments and blank lines allowed)."""
    lines = list(_data_lines(text))
    if not lines:
        raise ParseError(f"{name}: no counts line")
    if len(lines) > 1:
        raise ParseError(f"{name}:{lines[1][0]}: expected a single n0,n1,n2 line")
    lineno, line = lines[0]
    fields = [f.strip() for f in line.split(",")]
    where = f"{name}:{lineno}"
    if len(fields) != 3:
        raise ParseError(f"{where}: expected n0,n1,n2, got {len(fields)} fields")
    n0, n1, n2 = (_int_field(f, where) for f in fields)
    try:
        return CountRecord(n0, n1, n2)
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None


def read_counts(path) -> CountRecord:
    return parse_counts(Path(path).read_text(), str(path))


def fmt(v) -> str:
    """Shortest round-trip text for a number; empty for missing/undefined."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return ""
    return repr(v)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def render_table(meta: dict, columns, rows, as_json=False) -> str:
    """CSV with ``#``-prefixed metadata, or the same content as JSON."""
    if as_json:
        doc = {"meta": _jsonable(meta), "columns": list(columns),
               "rows": [[_jsonable(x) for x in r] for r in rows]}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        text = json.dumps(_jsonable(v), sort_keys=True) if isinstance(v, (dict, list)) else fmt(v)
        buf.write(f"# {k}: {text}\n")
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(fmt(x) for x in r) + "\n")
    return buf.getvalue()


def render_report(meta: dict, items, as_json=False) -> str:
    """Key/value report: ``quantity,value`` rows, or a JSON object."""
    if as_json:
        return json.dumps({"meta": _jsonable(meta), "report": _jsonable(dict(items))}, indent=2) + "\n"
    return render_table(meta, ("quantity", "value"), list(items))


def read_table(text: str):
    """Parse CSV emitted by :func:`render_table` back into ``(columns, rows)``.

    Empty fields come back as ``nan``.
    """
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    columns = lines[0].split(",")
    rows = []
    for ln in lines[1:]:
        rows.append([float(x) if x else math.nan for x in ln.split(",")])
    return columns, np.array(rows)
