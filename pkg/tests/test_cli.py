import json
import subprocess
import sys
from pathlib import Path

import pytest

from interchain.cli import main

DATA = Path(__file__).resolve().parents[1] / "data"


def test_enumerate_two_chains(capsys):
    assert main(["enumerate", "--k", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4
    assert lines[-1] == "({{0,1}}, {{0},{1}}, {{0,1}})\ttimestamping"


def test_enumerate_bad_k(capsys):
    assert main(["enumerate", "--k", "9"]) == 2
    assert "error" in capsys.readouterr().err


def test_usage_errors_exit_2(capsys):
    for argv in ([], ["enumerate"], ["enumerate", "--k", "x"], ["simulate", "--scenario", "a", "--seed", "-1"], ["nope"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_simulate_writes_trace(tmp_path, capsys):
    out = tmp_path / "t.jsonl"
    assert main(["simulate", "--scenario", str(DATA / "scenarios/split_brain_all.json"), "--seed", "4", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "violations: 1" in text and "culprits chain 0" in text
    assert main(["forensics", "--trace", str(out)]) == 0
    text = capsys.readouterr().out
    assert text.startswith("violation:") and "chain 1: culprits" in text


def test_simulate_missing_file(capsys):
    assert main(["simulate", "--scenario", "does/not/exist.json"]) == 2
    assert main(["forensics", "--trace", "does/not/exist.jsonl"]) == 2


def test_verify_passes_and_negative_control(tmp_path, capsys):
    assert main(["verify", "--k", "1"]) == 0
    assert "8/8 cells pass" in capsys.readouterr().out
    wrong = tmp_path / "expect.json"
    wrong.write_text(json.dumps({"safety": {"0,1": True}}))
    assert main(["verify", "--k", "1", "--expect", str(wrong)]) == 1
    assert "FAIL" in capsys.readouterr().out
    assert main(["verify", "--k", "1", "--f", "1"]) == 2
    assert main(["verify", "--k", "1", "--expect", str(tmp_path / "missing.json")]) == 2


def test_analyze_outputs(tmp_path, capsys):
    prefix = tmp_path / "out" / "rep"
    assert main(["analyze", "--graph", str(DATA / "zones3.json"), "--k", "0,2", "--out", str(prefix)]) == 0
    csv_text = (tmp_path / "out" / "rep.csv").read_text()
    assert csv_text == capsys.readouterr().out
    assert (tmp_path / "out" / "rep_hist_k2.csv").read_text().startswith("decade,count\n")
    assert main(["analyze", "--graph", str(DATA / "zones3.json"), "--k", "1", "--p", "2", "--out", str(prefix)]) == 2
    assert main(["analyze", "--graph", "missing.json", "--k", "1", "--out", str(prefix)]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "interchain", "enumerate", "--k", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.count("\n") >= 1
