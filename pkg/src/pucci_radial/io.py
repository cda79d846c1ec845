"""Profile CSV and summary JSON serialisation."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .exceptions import InvalidArgumentError

__all__ = ["CSV_HEADER", "format_float", "write_profile_csv", "read_profile_csv", "to_json", "write_json"]

CSV_HEADER = "r,u,du"


def format_float(x: float) -> str:
    """17 significant digits, scientific notation (exact round trip)."""
    return f"{float(x):.16e}"


def write_profile_csv(path, r, u, du) -> None:
    lines = [CSV_HEADER]
    for ri, ui, dui in zip(r, u, du):
        lines.append(f"{format_float(ri)},{format_float(ui)},{format_float(dui)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_profile_csv(path):
    """Return ``(r, u, du)`` arrays from a profile CSV."""
    text = Path(path).read_text(encoding="utf-8")
    rows = [line for line in text.split("\n") if line]
    if not rows or rows[0].strip() != CSV_HEADER:
        raise InvalidArgumentError(f"{path}: expected header {CSV_HEADER!r}")
    data = np.array([[float(x) for x in row.split(",")] for row in rows[1:]], dtype=float)
    if data.size == 0:
        return np.empty(0), np.empty(0), np.empty(0)
    if data.shape[1] != 3:
        raise InvalidArgumentError(f"{path}: expected three columns")
    return data[:, 0], data[:, 1], data[:, 2]


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, float):
        if math.isnan(obj):
            return None
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(to_json(obj), encoding="utf-8", newline="\n")
