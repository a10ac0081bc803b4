import json
import subprocess
import sys

import pytest

from triurn.cli import main


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def half(tmp_path):
    return write(tmp_path / "half.json", {"R": [["0.5", "0.5"], [0, 1]], "C0": ["0.5", "0.5"]})


@pytest.fixture
def unordered(tmp_path):
    return write(tmp_path / "u.json", {"R": [["0.5", 0, "0.5"], [0, "0.3", "0.7"], [0, 0, 1]],
                                       "C0": ["1/3", "1/3", "1/3"], "labels": ["a", "b", "c"]})


@pytest.fixture
def linked_fail(tmp_path):
    return write(tmp_path / "f.json", {"R": [["0.5", 0, "0.5"], [0, "0.5", "0.5"], [0, 0, 1]],
                                       "C0": ["1/3", "1/3", "1/3"]})


def test_analyze_json(half, tmp_path, capsys):
    assert main(["analyze", half]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["increasing_order"]["holds"]
    assert out["rates"][0] == {"color": 0, "exponent": "1/2", "log_power": 0}
    assert out["profile"]["colors"][1]["limit"]["kind"] == "deterministic_one"


def test_analyze_rearrange(unordered, capsys):
    assert main(["analyze", unordered, "--rearrange"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["perm"] == [1, 0, 2]
    assert out["rearranged"]["R"][0] == ["3/10", "0/1", "7/10"]
    assert out["rearranged"]["labels"] == ["b", "a", "c"]


def test_analyze_without_rearrange_reports_violation(unordered, capsys):
    assert main(["analyze", unordered, "--format", "text"]) == 0
    text = capsys.readouterr().out
    assert "increasing order: no, colors [1]" in text
    assert "profile: unavailable" in text


def test_invalid_model_exit_2(tmp_path, capsys):
    bad = write(tmp_path / "bad.json", {"R": [["0.5", "0.4"], [0, 1]], "C0": ["0.5", "0.5"]})
    assert main(["analyze", bad]) == 2
    assert "RowSumNotOne" in capsys.readouterr().err
    assert main(["verify", bad]) == 2


def test_normalize_flag(tmp_path, capsys):
    m = write(tmp_path / "n.json", {"R": [["0.5", "0.5"], [0, 1]], "C0": [1, 3]})
    assert main(["analyze", m]) == 2
    assert main(["analyze", m, "--normalize"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["model"]["C0"] == ["1/4", "3/4"]


def test_simulate_writes_reproducible_csv(half, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["simulate", half, "--steps", "2000", "--reps", "3", "--seed", "9",
                     "--track-m", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "# seed=9"
    assert lines[1].startswith("# config_hash=")
    assert lines[3] == "rep,N,c_1,c_2,scaled_1,scaled_2,U_1,U_2,M_1,M_2"


def test_oracle_modes(half, tmp_path):
    out = tmp_path / "o.json"
    assert main(["oracle", half, "--steps", "1", "--mode", "enumerate", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["mean"] == ["3/4", "5/4"]
    assert {(tuple(a["c"]), a["p"]) for a in rep["atoms"]} == {(("1/1", "1/1"), "1/2"), (("1/2", "3/2"), "1/2")}
    assert main(["oracle", half, "--steps", "4", "--mode", "martingale", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert all(c["max_discrepancy"] == "0/1" for c in rep["martingale_checks"])
    assert {c["kind"] for c in rep["martingale_checks"]} == {"U", "M"}


def test_oracle_too_large(half):
    assert main(["oracle", half, "--steps", "40", "--mode", "martingale"]) == 2


def test_verify_pass(half, tmp_path):
    out = tmp_path / "r.json"
    assert main(["verify", half, "--steps", "20000", "--reps", "50", "--seed", "4", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and rep["metadata"]["seed"] == 4
    assert rep["metadata"]["config_hash"]


def test_verify_fail_exit_1(half, tmp_path):
    cfg = write(tmp_path / "tol.json", {"tolerances": {"exponent": 0.0}})
    assert main(["verify", half, "--steps", "20000", "--reps", "50", "--config", cfg,
                 "--out", str(tmp_path / "r.json")]) == 1


def test_verify_assumption_exit_3(linked_fail, tmp_path):
    assert main(["verify", linked_fail, "--out", str(tmp_path / "r.json")]) == 3
    cfg = write(tmp_path / "c.json", {"require_unique_arrangement": False, "steps": 20000, "reps": 50})
    # rates-only mode still records the failed assumption as a verdict
    assert main(["verify", linked_fail, "--config", cfg, "--out", str(tmp_path / "r.json")]) == 1


def test_entry_point(half):
    res = subprocess.run([sys.executable, "-m", "triurn.cli", "analyze", half, "--format", "text"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert "color 0: C_N ~ N^1/2" in res.stdout
