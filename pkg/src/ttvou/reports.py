"""Deterministic serialization: JSON envelopes, result tables and the
per-figure CSV series.

Numbers are written with 15 significant digits; NaN and infinities become
``null`` in JSON and ``inf``/``nan`` in CSV.  Output is UTF-8 with LF line
endings and a fixed field order, so identical runs are byte-identical.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
from dataclasses import fields, is_dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

SIG_DIGITS = 15


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def normalize(obj):
    """Convert results into JSON-ready builtins with rounded floats."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt_float(x)) if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [normalize(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(normalize(k)): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if hasattr(obj, "as_dict"):
        return normalize(obj.as_dict())
    if is_dataclass(obj):
        return normalize({f.name: getattr(obj, f.name) for f in fields(obj)})
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(normalize(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def digest(paths=(), specs=()) -> str:
    """sha256 over input file contents (in order) and builtin model specs."""
    h = hashlib.sha256()
    for p in paths:
        data = Path(p).read_bytes()
        h.update(len(data).to_bytes(8, "little"))
        h.update(data)
    for s in specs:
        h.update(b"\0spec:")
        h.update(str(s).encode())
    return h.hexdigest()


def envelope(tool_version: str, command: str, config: dict, inputs_digest: str,
             results, warnings) -> dict:
    return {"tool_version": tool_version, "command": command, "config": config,
            "inputs_digest": inputs_digest, "results": results, "warnings": list(warnings)}


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    if v is None:
        return ""
    if isinstance(v, enum.Enum):
        return v.value
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def flatten(obj, prefix="") -> list[tuple[str, object]]:
    """Dotted ``key, value`` pairs for a nested result, in insertion order."""
    out = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            out.extend(flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            out.extend(flatten(v, f"{prefix}[{i}]"))
    else:
        out.append((prefix, obj))
    return out


# ---------------------------------------------------------------------------
# figure series

FIGURES = {
    "fig6_decomposition": ("route", "certainty_pct", "reliability_pct", "unreliability_pct"),
    "fig7_condition": ("model", "tau", "ratio"),
    "fig8_tradeoff": ("tau", "ett", "ttvr"),
}


def emit_plot_data(series: dict, output_dir) -> list[Path]:
    """Write one CSV per figure present in ``series`` (a mapping from figure
    name to row tuples).  Rows are sorted by the first column, then tau."""
    present = {k: v for k, v in series.items() if k in FIGURES}
    if not present or not any(present.values()):
        raise ValidationError("no plot series to emit")
    written = []
    for name, rows in present.items():
        if not rows:
            continue
        path = Path(output_dir) / f"{name}.csv"
        # fig7 is keyed by (model, tau); the others have a unique first column
        key = (lambda r: (r[0], r[1])) if name == "fig7_condition" else (lambda r: r[0])
        write_text(path, csv_text(FIGURES[name], sorted(rows, key=key)))
        written.append(path)
    return written
