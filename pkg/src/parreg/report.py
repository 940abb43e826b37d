"""Deterministic report and field-file serialization.

JSON is emitted with sorted keys and every float printed with 17 significant
digits, so identical results produce identical bytes.  CSV follows RFC 4180
(CRLF line endings, quoted only when needed).  Field files carry a one-line
JSON header (grid spec, axis order, endianness) followed by raw little-endian
8-byte floats in C order, time slowest.
"""

import csv
import json
import os
from dataclasses import asdict, is_dataclass

import numpy as np

from .errors import IoFailure
from .grids import Field, GridSpec


def _normalize(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _normalize(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_normalize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def _format_float(x: float) -> str:
    if x != x:
        return "NaN"
    if x in (float("inf"), float("-inf")):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _encode(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, list):
        out.append("[")
        for k, v in enumerate(obj):
            if k:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj)):
            if k:
                out.append(", ")
            out.append(json.dumps(key) + ": ")
            _encode(obj[key], out)
        out.append("}")
    else:
        raise IoFailure(f"cannot serialize {type(obj).__name__}")


def to_json_text(obj) -> str:
    out: list = []
    _encode(_normalize(obj), out)
    return "".join(out) + "\n"


def write_json(path: str, obj) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(to_json_text(obj))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def write_csv(path: str, header, rows) -> None:
    """RFC 4180 CSV; every float cell uses 17 significant digits."""
    rows = list(rows)
    if not rows:
        raise IoFailure("refusing to write an empty report")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow([
                    _format_float(v) if isinstance(v, (float, np.floating)) else v
                    for v in row
                ])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def estimate_rows(reports) -> tuple:
    """Flatten EstimateReports to the (p, i, j, lambda, ratio, bound, pass) table."""
    header = ["p", "i", "j", "lambda", "ratio", "bound", "pass"]
    rows = []
    for r in reports:
        rows.append([
            float(r.p), int(r.i), int(r.j), float(r.lam), float(r.ratio),
            "" if r.bound is None else float(r.bound),
            "" if r.passed is None else str(bool(r.passed)).lower(),
        ])
    return header, rows


_MAGIC = "parreg-field-v1"


def write_field(path: str, field: Field) -> None:
    g = field.grid
    header = {
        "format": _MAGIC,
        "dim": g.dim,
        "half_widths": list(g.half_widths),
        "points": list(g.points),
        "t0": g.t0,
        "t1": g.t1,
        "nt": g.nt,
        "axis_order": ["t"] + [f"x{a + 1}" for a in range(g.dim)],
        "dtype": "<f8",
        "order": "C",
    }
    try:
        with open(path, "wb") as fh:
            fh.write(to_json_text(header).encode("utf-8"))
            fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_field(path: str) -> Field:
    try:
        with open(path, "rb") as fh:
            header_line = fh.readline()
            header = json.loads(header_line.decode("utf-8"))
            if header.get("format") != _MAGIC:
                raise IoFailure(f"{path}: not a field file")
            grid = GridSpec(
                dim=int(header["dim"]),
                half_widths=tuple(float(v) for v in header["half_widths"]),
                points=tuple(int(v) for v in header["points"]),
                t0=float(header["t0"]),
                t1=float(header["t1"]),
                nt=int(header["nt"]),
            )
            count = grid.nt * int(np.prod(grid.points))
            data = np.frombuffer(fh.read(count * 8), dtype="<f8").reshape(
                grid.nt, *grid.points
            )
            return Field(grid=grid, values=data.astype(float))
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)
