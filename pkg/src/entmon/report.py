"""JSON and CSV writers for reports and traces.

Reports are serialized deterministically: keys keep insertion order, every
float is written with 17 significant digits, complex numbers become
``{"re": ..., "im": ...}`` and non-finite floats become the strings
``"inf"``, ``"-inf"`` or ``"nan"``.
"""

from __future__ import annotations

import csv
import json
import math
from fractions import Fraction
from typing import IO, Sequence

import numpy as np

SCHEMA_VERSION = "1"


def _float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _encode(obj, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return _encode({"re": obj.real, "im": obj.imag}, indent, level)
    if isinstance(obj, Fraction):
        return json.dumps(str(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [_encode(v, indent, level + 1) for v in obj]
        return "[" + pad + ("," + pad).join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict, indent: int = 2) -> str:
    """Serialize ``report`` with a leading ``"schema"`` field."""
    body = {"schema": SCHEMA_VERSION}
    body.update(report)
    return _encode(body, indent, 0) + "\n"


TRACE_COLUMNS = [
    "step",
    "lambda1_re", "lambda1_im",
    "lambda2_re", "lambda2_im",
    "L1_re", "L1_im",
    "L2_re", "L2_im",
    "L3_re", "L3_im",
    "residual",
]


def write_trace_csv(fh: IO[str], trace: Sequence, slice_) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for i, st in enumerate(trace):
        row = [i]
        for v in (st.lambda1, st.lambda2, st.L1, st.L2, st.L3):
            row += [format(v.real, ".17g"), format(v.imag, ".17g")]
        row.append(format(st.residual(slice_), ".17g"))
        writer.writerow(row)
