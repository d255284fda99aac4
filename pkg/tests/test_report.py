import json
import math

from hypothesis import given, strategies as st

from subconv_lab.report import Cell, SweepReport, csv_header, emit_report, load_report, report_to_csv, report_to_json


def _report(cells, guard=1.0):
    r = SweepReport(suite="demo", grid={"c": [1, 2]}, cells=cells, guard=guard, columns=["a", "b"], reference_name="bound")
    return r.finalize(wall_time=0.5)


def test_empty_report_json_and_csv(tmp_path):
    r = _report([])
    d = json.loads(report_to_json(r))
    assert d["cells"] == [] and d["summary"]["n_cells"] == 0 and d["summary"]["passed"]
    assert list(d)[:2] == ["suite", "tool_version"] and list(d)[-1] == "timing"
    path = emit_report(r, "csv", tmp_path / "sub" / "empty.csv")
    assert path.read_text() == "a,b,value_re,value_im,bound,ratio\n"


def test_header_and_summary():
    cells = [Cell({"a": 1, "b": 2}, 1 + 2j, 3.0, 0.25), Cell({"a": 2, "b": 5}, -1.0, 2.0, 1.5)]
    r = _report(cells)
    assert csv_header(r) == ["a", "b", "value_re", "value_im", "bound", "ratio"]
    assert r.summary["max_ratio"] == 1.5 and r.summary["argmax"] == {"a": 2, "b": 5}
    assert not r.passed
    rows = report_to_csv(r).splitlines()
    assert rows[1] == "1,2,1,2,3,0.25"


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(finite, finite, finite, finite)
def test_one_cell_round_trip(tmp_path_factory, re, im, ref, ratio):
    r = _report([Cell({"a": 1, "b": "x"}, complex(re, im), ref, abs(ratio), {"trace": [1 + 1j, 0.5]})], guard=None)
    path = emit_report(r, "json", tmp_path_factory.mktemp("rt") / "r.json")
    back = load_report(path)
    c = back.cells[0]
    assert c.value == complex(re, im) and c.reference == ref and c.ratio == abs(ratio)
    assert c.extra == {"trace": [{"re": 1.0, "im": 1.0}, 0.5]}
    assert back.summary == json.loads(json.dumps(r.summary))


@given(finite)
def test_csv_floats_parse_back_exactly(x):
    r = _report([Cell({"a": 0, "b": 0}, complex(x, 0.0), 1.0, 0.0)])
    field = report_to_csv(r).splitlines()[1].split(",")[2]
    assert float(field) == x


def test_non_finite_becomes_null():
    r = _report([Cell({"a": 0, "b": 0}, 1.0, math.inf, math.nan)])
    d = json.loads(report_to_json(r))
    assert d["cells"][0]["reference"] is None and d["cells"][0]["ratio"] is None


def test_json_deterministic_outside_timing():
    a = json.loads(report_to_json(_report([Cell({"a": 1, "b": 1}, 0.1, 1.0, 0.1)])))
    b = json.loads(report_to_json(_report([Cell({"a": 1, "b": 1}, 0.1, 1.0, 0.1)])))
    a.pop("timing"), b.pop("timing")
    assert a == b
