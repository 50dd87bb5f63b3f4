"""Canonical JSON and CSV emission.

Identical inputs must produce byte-identical files, so this module owns the
float formatting policy: 17 significant digits (enough for exact float64
round-trips), sorted object keys, '\n' line endings. Strict JSON has no
Infinity literal, so non-finite floats are emitted as the strings
"Infinity", "-Infinity" and "NaN".
"""

from __future__ import annotations

import dataclasses
import math
from typing import Any

import numpy as np

SIGNIFICANT_DIGITS = 17


def format_float(value: float) -> str:
    """Render a finite float with 17 significant digits."""
    if not math.isfinite(value):
        raise ValueError("non-finite float has no numeric JSON form")
    text = format(value, ".17g")
    # normalize negative zero so equal values serialize identically
    if text == "-0":
        text = "0"
    return text


def to_jsonable(obj: Any) -> Any:
    """Convert nested dataclasses / numpy values to plain JSON-ready python.

    Non-finite floats become strings here so the result is also safe to hand
    to ordinary json encoders (the service layer relies on this).
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isnan(value):
            return "NaN"
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
        return value
    return obj


def _encode(obj: Any, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, str):
        import json as _json

        parts.append(_json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, int):
        parts.append(str(obj))
    elif isinstance(obj, float):
        parts.append(format_float(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                parts.append(",")
            _encode(str(key), parts)
            parts.append(":")
            _encode(obj[key], parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, item in enumerate(obj):
            if i:
                parts.append(",")
            _encode(item, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot canonically encode {type(obj).__name__}")


def canonical_json(obj: Any) -> str:
    """Serialize to deterministic JSON text (sorted keys, 17-digit floats)."""
    parts: list[str] = []
    _encode(to_jsonable(obj), parts)
    parts.append("\n")
    return "".join(parts)


def canonical_csv(columns: list[str], rows: list[dict[str, Any]]) -> str:
    """Serialize rows to deterministic CSV text with a fixed column order."""
    lines = [",".join(columns)]
    for row in rows:
        cells = []
        for col in columns:
            value = row[col]
            if isinstance(value, (bool, np.bool_)):
                cells.append("true" if value else "false")
            elif isinstance(value, (int, np.integer)):
                cells.append(str(int(value)))
            elif isinstance(value, (float, np.floating)):
                value = float(value)
                if math.isnan(value):
                    cells.append("NaN")
                elif math.isinf(value):
                    cells.append("Infinity" if value > 0 else "-Infinity")
                else:
                    cells.append(format_float(value))
            else:
                cells.append(str(value))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
