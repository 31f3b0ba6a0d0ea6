"""Deterministic JSON/CSV serialization and report schemas."""
from __future__ import annotations

import csv
import io
import json
import math
from importlib import resources

import numpy as np

from .errors import ParameterError

SCHEMA_VERSION = "khqa-su11/1"


def format_float(x) -> str:
    return format(float(x), ".17g")


def format_complex(z) -> str:
    z = complex(z)
    im = z.imag
    sign = "-" if im < 0 else "+"
    return f"{format_float(z.real)}{sign}{format_float(abs(im))}i"


def parse_complex(text) -> complex:
    """Read ``a+bi`` / ``a-bi`` / ``a`` / ``bi`` (``j`` accepted for ``i``)."""
    if isinstance(text, (int, float, complex)) and not isinstance(text, bool):
        z = complex(text)
    else:
        s = str(text).strip().replace(" ", "")
        if s.endswith("i"):
            s = s[:-1] + "j"
        try:
            z = complex(s)
        except ValueError:
            raise ParameterError(f"cannot read complex number {text!r}", value=str(text)) from None
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ParameterError("complex number must be finite", value=str(text))
    return z


def _encode(obj, out):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        out.append(format_float(x) if math.isfinite(x) else "null")
    elif isinstance(obj, (complex, np.complexfloating)):
        out.append(json.dumps(format_complex(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            out.append(json.dumps(str(k)))
            out.append(": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with floats written to 17 significant digits."""
    out = []
    _encode(obj, out)
    return "".join(out) + "\n"


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        cells = []
        for c in columns:
            v = row[c]
            if isinstance(v, (float, np.floating)):
                v = format_float(v)
            elif isinstance(v, complex):
                v = format_complex(v)
            elif isinstance(v, (list, tuple)):
                v = " ".join(str(x) for x in v)
            cells.append(v)
        w.writerow(cells)
    return buf.getvalue()


def load_schema(name: str) -> dict:
    with resources.files("khqa").joinpath("schemas", f"{name}.json").open("r", encoding="utf-8") as fh:
        return json.load(fh)


def validate(report: dict, name: str) -> None:
    import jsonschema

    jsonschema.validate(json.loads(dumps(report)), load_schema(name))
