import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from entmon.levelset import LevelSetSlice
from entmon.monodromy import LogLiftState
from entmon.report import TRACE_COLUMNS, dumps, write_trace_csv


def test_schema_field_comes_first():
    text = dumps({"a": 1})
    assert list(json.loads(text)) == ["schema", "a"]
    assert json.loads(text)["schema"] == "1"


def test_floats_round_trip():
    values = [0.1, 1 / 3, math.pi, 1e-300, -2.5e17, np.float64(0.2)]
    parsed = json.loads(dumps({"v": values}))["v"]
    assert parsed == [float(v) for v in values]
    assert "0.10000000000000001" in dumps({"x": 0.1})


def test_special_values():
    obj = json.loads(dumps({"z": 1 + 2j, "inf": math.inf, "ninf": -math.inf, "q": Fraction(3, 2),
                            "n": None, "b": np.bool_(True), "i": np.int64(7), "empty": [], "e": {}}))
    assert obj["z"] == {"re": 1.0, "im": 2.0}
    assert obj["inf"] == "inf" and obj["ninf"] == "-inf"
    assert obj["q"] == "3/2" and obj["n"] is None and obj["b"] is True and obj["i"] == 7
    assert obj["empty"] == [] and obj["e"] == {}


def test_unserializable():
    with pytest.raises(TypeError):
        dumps({"x": object()})


def test_deterministic():
    report = {"b": [0.1, 2j], "a": {"nested": 1 / 7}}
    assert dumps(report) == dumps(dict(report))


def test_trace_csv_columns():
    s = LevelSetSlice.through((0.2, 0.3))
    st = LogLiftState.from_real(s, 0.2, 0.3)
    buf = io.StringIO()
    write_trace_csv(buf, [st, st], s)
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == TRACE_COLUMNS
    assert len(lines) == 3
    row = lines[1].split(",")
    assert row[0] == "0" and float(row[1]) == 0.2 and float(row[-1]) <= 1e-15
