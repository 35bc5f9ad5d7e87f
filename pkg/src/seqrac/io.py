"""CSV / JSON serialisation of report rows with fixed float precision."""
from __future__ import annotations

import csv
import io
import json
import math

from . import constants as C


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    return format(x, f".{C.FLOAT_DIGITS}g")


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def _json_value(v):
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return float(fmt_float(v)) if math.isfinite(v) else None
    return str(v)


def to_csv(rows, fields) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow([_cell(row.get(f)) for f in fields])
    return buf.getvalue()


def to_json(rows, fields) -> str:
    data = [{f: _json_value(row.get(f)) for f in fields} for row in rows]
    return json.dumps(data, indent=2) + "\n"


def render(rows, fields, fmt: str = "csv") -> str:
    if fmt == "csv":
        return to_csv(rows, fields)
    if fmt == "json":
        return to_json(rows, fields)
    raise ValueError(f"unknown format {fmt!r}")


def read_config(path) -> dict:
    """Parse a ``key = value`` file; blank lines and ``#`` comments are ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out
