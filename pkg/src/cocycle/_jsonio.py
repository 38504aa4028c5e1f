"""JSON reading and writing; floats are written with 17 significant digits."""

import json
import math
from pathlib import Path

from .errors import InvalidInput


def _encode(obj, out):
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot encode {obj!r} as JSON")
        text = format(obj, ".17g")
        if text.lstrip("-").isdigit():
            text += ".0"
        out.append(text)
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                out.append(", ")
            out.append(json.dumps(str(key), ensure_ascii=False))
            out.append(": ")
            _encode(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, val in enumerate(obj):
            if k:
                out.append(", ")
            _encode(val, out)
        out.append("]")
    elif hasattr(obj, "item"):  # numpy scalar
        _encode(obj.item(), out)
    else:
        raise TypeError(f"cannot encode {type(obj).__name__} as JSON")


def dumps(obj) -> str:
    out = []
    _encode(obj, out)
    return "".join(out)


def load(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: invalid JSON ({exc})") from exc
