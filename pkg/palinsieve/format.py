"""Report serialization, output writing, and stderr notices."""

import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import fields, is_dataclass
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from palinsieve.numeric import Angle

SCHEMA_VERSION = 1


def _mpf_text(value: mpmath.mpf) -> str:
    """Shortest decimal, at most 17 digits, that reads back as ``value``."""
    for digits in range(1, 17):
        text = mpmath.nstr(value, digits)
        if mpmath.mpf(text) == value:
            return text
    return mpmath.nstr(value, 17)


def to_jsonable(value):
    """Convert report values into strict-JSON-safe Python objects.

    Non-finite floats become ``"inf"``/``"-inf"``; mpmath reals outside the
    double range become the shortest decimal strings (at most 17 digits) that
    read back exactly; fractions become ``"p/q"``.
    """
    if isinstance(value, Angle):
        return str(value)
    if is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return {"re": to_jsonable(value.real), "im": to_jsonable(value.imag)}
    if isinstance(value, mpmath.mpf):
        if mpmath.isinf(value):
            return "inf" if value > 0 else "-inf"
        as_float = float(value)
        if math.isinf(as_float) or (as_float == 0.0 and value != 0):
            return _mpf_text(value)
        return as_float
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return str(value)


def format_json(**data) -> str:
    """Format data as one deterministic JSON line (sorted keys, compact)."""
    return json.dumps(
        to_jsonable(data), sort_keys=True, separators=(",", ":"), allow_nan=False
    )


def format_record(record, **extra) -> str:
    """One JSON line for a report dataclass, tagged with the schema version."""
    return format_json(schema=SCHEMA_VERSION, **extra, **to_jsonable(record))


def format_csv(header: list[str], rows) -> str:
    """Format rows as CSV; the header line is always present."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _csv_cell(value):
    value = to_jsonable(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return value


def write_output(text: str, out: str | None) -> None:
    """Write to stdout, or atomically to ``out`` using temp file + rename."""
    if not text.endswith("\n"):
        text += "\n"
    if not out:
        sys.stdout.write(text)
        return
    path = Path(out)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp_path, path)
    except Exception:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


def notice(message: str, quiet: bool = False) -> None:
    """Print a progress banner on stderr unless quiet."""
    if not quiet:
        print(f"--- {message} ---", file=sys.stderr)


def format_error(message: str) -> str:
    """Format an error message. Always plain text, always stderr."""
    return f"ERR: {message}"
