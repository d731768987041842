import json
import math

import pytest

from lanefree.trace import SimTrace, dumps_json


def test_dumps_json_scalars():
    assert dumps_json(None) == "null"
    assert dumps_json(True) == "true"
    assert dumps_json(False) == "false"
    assert dumps_json(3) == "3"
    assert dumps_json("a\"b") == json.dumps("a\"b")


def test_dumps_json_floats_round_trip():
    for value in (0.1, 1.0 / 3.0, 2e-3, math.pi, 1e300, -4.9e-324, 0.0):
        assert json.loads(dumps_json(value)) == value


def test_dumps_json_containers_are_deterministic():
    obj = {"b": [1, 2.5, None], "a": {"nested": True}}
    text = dumps_json(obj)
    assert text == '{"b":[1,2.5,null],"a":{"nested":true}}'
    assert json.loads(text) == obj


def test_dumps_json_rejects_unknown_types():
    with pytest.raises(TypeError):
        dumps_json({"x": object()})


def test_trace_write_read_round_trip(tmp_path):
    trace = SimTrace(header={"n": 2, "H0": 1.5},
                     records=[{"t": 0.0, "d_min": 7.0},
                              {"t": 0.1, "d_min": 6.5}],
                     summary={"completed": True})
    path = tmp_path / "trace.jsonl"
    trace.write_jsonl(path)
    back = SimTrace.read_jsonl(path)
    assert back.header == trace.header
    assert back.records == trace.records
    assert back.summary == trace.summary


def test_trace_requires_header(tmp_path):
    path = tmp_path / "broken.jsonl"
    path.write_text('{"kind":"record","t":0}\n')
    with pytest.raises(ValueError):
        SimTrace.read_jsonl(path)


def test_trace_rejects_unknown_line_kind(tmp_path):
    path = tmp_path / "broken.jsonl"
    path.write_text('{"kind":"header"}\n{"kind":"banana"}\n')
    with pytest.raises(ValueError):
        SimTrace.read_jsonl(path)
