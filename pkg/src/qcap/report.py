"""Byte-stable serialization of reports and curves."""
import json
import math
from decimal import Decimal, ROUND_HALF_EVEN

import numpy as np

SIG_DIGITS = 12


def format_float(x, digits=SIG_DIGITS):
    """Shortest decimal for x rounded half-even to ``digits`` significant digits."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    if x == 0:
        return "0.0"
    dec = Decimal(repr(x))
    exp = dec.adjusted()
    q = Decimal(1).scaleb(exp - digits + 1)
    r = dec.quantize(q, rounding=ROUND_HALF_EVEN)
    return repr(float(r))


class _Float(float):
    def __repr__(self):
        return format_float(self)

    __str__ = __repr__


def to_jsonable(obj):
    """Recursively convert numpy values and dataclass-like objects to plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": to_jsonable(obj.real.tolist()), "im": to_jsonable(obj.imag.tolist())}
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, complex):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(obj[k], indent, level + 1)}" for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        s = format_float(obj)
        return "null" if s in ("NaN", "Infinity", "-Infinity") else s
    return json.dumps(obj)


def dumps(obj, indent=2):
    """JSON text with sorted keys and floats at 12 significant digits."""
    return _encode(to_jsonable(obj), indent, 0) + "\n"
