import csv
import json

import pytest

from subconv_lab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_delta(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "delta", "--out", str(tmp_path))
    assert code == 0 and "delta: PASS" in out
    rep = json.loads((tmp_path / "verify-delta.json").read_text())
    ns = {c["inputs"]["n"] for c in rep["cells"]}
    assert ns == set(range(-50, 51)) and rep["config_hash"]


def test_unknown_suite_and_target(tmp_path, capsys):
    code, _, err = run(capsys, "verify", "nosuch", "--out", str(tmp_path))
    assert code == 2 and "unknown suite" in err
    assert run(capsys, "sweep", "nosuch", "--out", str(tmp_path))[0] == 2
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "verify", "delta", "--grid", "huge")[0] == 2
    assert run(capsys, "sweep", "deligne", "--m1", "5,x", "--out", str(tmp_path))[0] == 2


def test_bad_config_file_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[run]\nnope = 1\n")
    assert run(capsys, "verify", "delta", "--config", str(cfg), "--out", str(tmp_path))[0] == 2


def test_verify_astar_small(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", "astar", "--grid", "small", "--out", str(tmp_path))
    assert code == 0
    rep = json.loads((tmp_path / "verify-astar.json").read_text())
    assert {c["inputs"]["kind"] for c in rep["cells"]} == {"zero", "nonzero"}


def test_sweep_weil_csv_header(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "weil", "--cmax", "200", "--out", str(tmp_path))
    assert code == 0
    with open(tmp_path / "sweep-weil.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["a", "b", "c", "value_re", "value_im", "bound", "ratio"]
    assert max(int(r[2]) for r in rows[1:]) == 200


def test_sweep_deligne_summary_line(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "deligne", "--m1", "5,7", "--out", str(tmp_path))
    assert code == 0
    line = out.splitlines()[0]
    assert line.startswith("deligne: PASS") and "max_ratio=" in line


def test_empty_grid_gives_header_only(tmp_path, capsys):
    code, _, _ = run(capsys, "sweep", "deligne", "--m1", "", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "sweep-deligne.csv").read_text().count("\n") == 1


def test_failing_guard_exits_1(tmp_path, capsys):
    cfg = tmp_path / "tight.ini"
    cfg.write_text("[guards]\ndeligne = 0.01\n")
    code, out, _ = run(capsys, "sweep", "deligne", "--m1", "5", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 1 and "FAIL" in out
    rep = json.loads((tmp_path / "sweep-deligne.json").read_text())
    assert rep["summary"]["argmax"] is not None


def test_pipeline_exit_and_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    code, out, _ = run(capsys, "pipeline", "--out", str(a))
    assert code == 0
    records = [json.loads(line) for line in out.splitlines()]
    kinds = [r["record"] for r in records]
    assert kinds[:3] == ["instance", "circle", "congruence-split"] and kinds[-1] == "error-term-audit"
    assert all(r["passed"] for r in records if "passed" in r)
    assert run(capsys, "pipeline", "--out", str(b))[0] == 0
    assert (a / "pipeline.jsonl").read_bytes() == (b / "pipeline.jsonl").read_bytes()


def test_pipeline_equal_moduli_exit_2(tmp_path, capsys):
    cfg = tmp_path / "eq.ini"
    cfg.write_text("[pipeline]\nM1 = 7\nM2 = 7\n")
    code, _, err = run(capsys, "pipeline", "--config", str(cfg), "--out", str(tmp_path))
    assert code == 2 and "distinct primes" in err


def test_workers_env_override(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SUBCONV_LAB_WORKERS", "2")
    code, _, _ = run(capsys, "sweep", "deligne", "--m1", "5", "--workers", "1", "--out", str(tmp_path))
    assert code == 0
