"""Deterministic table output and the plain-text state-file format.

Tables are written either as CSV (header row, comma separated, 12
significant digits, ``\\n`` line endings) or as one JSON object with
``params`` and ``rows`` keys. State files hold the mode count on the first
line followed by one ``re im`` pair per mode.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable, Mapping, Sequence, TextIO

import numpy as np

from perfectw.errors import ValidationError

SIG_DIGITS = 12
STATE_NORM_TOL = 1e-6


def fmt_number(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == 0.0:
            return "0"  # folds -0.0
        return format(x, f".{SIG_DIGITS}g")
    if x is None:
        return ""
    return str(x)


def _json_value(x: Any) -> Any:
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return 0.0 if x == 0.0 else float(format(x, f".{SIG_DIGITS}g"))
    if isinstance(x, Mapping):
        return {str(k): _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_json_value(v) for v in x]
    return x


def render_table(
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    params: Mapping[str, Any],
    fmt: str = "csv",
) -> str:
    """Serialize a table; identical inputs always give identical text."""
    rows = [list(r) for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([fmt_number(v) for v in r])
        return buf.getvalue()
    if fmt == "json":
        doc = {
            "params": _json_value(dict(params)),
            "rows": [{c: _json_value(v) for c, v in zip(columns, r)} for r in rows],
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValidationError("format", f"unknown output format {fmt!r}; use csv or json")


def write_state(amplitudes: Sequence[complex], stream: TextIO) -> None:
    amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
    stream.write(f"{amps.size}\n")
    for c in amps:
        stream.write(f"{fmt_number(c.real)} {fmt_number(c.imag)}\n")


def parse_state(text: str, source: str = "state file") -> np.ndarray:
    """Parse the state-file format; blank lines and ``#`` comments are ignored.

    Raises:
        ValidationError: on a malformed file or amplitudes whose norm differs
            from 1 by more than ``1e-6``.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValidationError("state-file", f"{source} is empty")
    try:
        n = int(lines[0])
    except ValueError:
        raise ValidationError("state-file", f"{source}: first line must be the mode count") from None
    if n < 1 or len(lines) - 1 != n:
        raise ValidationError("state-file", f"{source}: header says {n} modes, found {len(lines) - 1} lines")
    amps = []
    for i, ln in enumerate(lines[1:], start=1):
        parts = ln.split()
        try:
            if len(parts) != 2:
                raise ValueError
            re_, im_ = float(parts[0]), float(parts[1])
        except ValueError:
            raise ValidationError("state-file", f"{source}: mode {i} is not an 're im' pair: {ln!r}") from None
        amps.append(complex(re_, im_))
    amps = np.array(amps)
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > STATE_NORM_TOL:
        raise ValidationError("state-file", f"{source}: amplitudes have norm {norm:.9g}, expected 1")
    return amps / norm
