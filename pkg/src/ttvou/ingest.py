"""Reading travel-time samples from text and CSV files."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .errors import NonPositiveSample, ParseError

COLUMN = "travel_time"


def _number(text, line):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"not a number: {text.strip()!r}", line) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value: {text.strip()!r}", line)
    if v <= 0:
        raise NonPositiveSample(f"line {line}: travel time must be positive, got {v:g}", line)
    return v


def _is_number(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def _read_lines(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read().splitlines()


def ingest_samples(path, warnings: list | None = None) -> np.ndarray:
    """Positive travel times from ``path``, in file order.

    Accepts one number per line, or a CSV whose header row has a
    ``travel_time`` column.  Blank lines are skipped (and reported through
    ``warnings`` when given).
    """
    path = Path(path)
    lines = _read_lines(path)
    first = next((i for i, ln in enumerate(lines) if ln.strip()), None)
    if first is None:
        raise ParseError(f"{path}: no data")
    values, skipped = [], 0
    header = lines[first]
    if _is_number(header.strip()):
        for i, ln in enumerate(lines, start=1):
            if not ln.strip():
                skipped += 1
                continue
            values.append(_number(ln, i))
    else:
        cols = [c.strip() for c in next(csv.reader([header]))]
        if COLUMN not in cols:
            raise ParseError(f"header has no {COLUMN!r} column", first + 1)
        j = cols.index(COLUMN)
        for i, ln in enumerate(lines[first + 1:], start=first + 2):
            if not ln.strip():
                skipped += 1
                continue
            row = next(csv.reader([ln]))
            if j >= len(row) or not row[j].strip():
                raise ParseError(f"missing {COLUMN} value", i)
            values.append(_number(row[j], i))
    if not values:
        raise ParseError(f"{path}: no data rows")
    out = np.asarray(values, dtype=float)
    if skipped and warnings is not None:
        warnings.append(f"{path.name}: skipped {skipped} blank line(s); kept n={out.size}, "
                        f"min={out.min():.15g}, max={out.max():.15g}")
    return out


def ingest_route_columns(path, warnings: list | None = None) -> dict[str, np.ndarray]:
    """Multi-route CSV: one column per route, header row naming the routes.
    Empty cells are allowed where routes have unequal sample counts."""
    path = Path(path)
    lines = _read_lines(path)
    first = next((i for i, ln in enumerate(lines) if ln.strip()), None)
    if first is None:
        raise ParseError(f"{path}: no data")
    names = [c.strip() for c in next(csv.reader([lines[first]]))]
    if any(not n for n in names) or len(set(names)) != len(names):
        raise ParseError("route header needs unique, non-empty names", first + 1)
    cols = {n: [] for n in names}
    skipped = 0
    for i, ln in enumerate(lines[first + 1:], start=first + 2):
        if not ln.strip():
            skipped += 1
            continue
        row = next(csv.reader([ln]))
        if len(row) > len(names):
            raise ParseError(f"expected at most {len(names)} fields, got {len(row)}", i)
        for n, cell in zip(names, row):
            if cell.strip():
                cols[n].append(_number(cell, i))
    if skipped and warnings is not None:
        warnings.append(f"{path.name}: skipped {skipped} blank line(s)")
    return {n: np.asarray(v, dtype=float) for n, v in cols.items()}
