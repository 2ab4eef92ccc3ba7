"""Fixed-precision text output helpers.

Machine-readable outputs carry floats at 17 significant digits, which is
enough to round-trip IEEE doubles exactly: parse(emit(x)) recovers x for
every finite value. Table output rounds to 6 significant digits.
"""

from __future__ import annotations

import json
import math
import numbers


def sig17(value) -> str:
    """Render a float with 17 significant digits, keeping a float-typed token."""
    text = format(float(value), ".17g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def sig6(value) -> str:
    """Render a float with 6 significant digits."""
    return format(float(value), ".6g")


def dumps(obj) -> str:
    """JSON text with sig17 floats; dict insertion order is preserved."""
    parts: list[str] = []
    _write(obj, parts)
    return "".join(parts)


def _write(obj, parts: list[str]) -> None:
    if obj is None:
        parts.append("null")
    elif isinstance(obj, bool):
        parts.append("true" if obj else "false")
    elif isinstance(obj, numbers.Integral):
        parts.append(str(int(obj)))
    elif isinstance(obj, numbers.Real):
        value = float(obj)
        if not math.isfinite(value):
            raise ValueError("non-finite floats cannot be serialized")
        parts.append(sig17(value))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        for i, (key, val) in enumerate(obj.items()):
            if i:
                parts.append(", ")
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be strings, got {type(key).__name__}")
            parts.append(json.dumps(key))
            parts.append(": ")
            _write(val, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple)):
        parts.append("[")
        for i, val in enumerate(obj):
            if i:
                parts.append(", ")
            _write(val, parts)
        parts.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
