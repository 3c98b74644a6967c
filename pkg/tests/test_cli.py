import json
import subprocess
import sys

import numpy as np
import pytest

from mdap.cli import main
from mdap.model import is_latin_assignment, is_planar_assignment


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parisi(capsys):
    code, out, _ = run(capsys, "bound", "parisi", "--n", "10")
    assert code == 0 and out.strip() == "1.549768"


def test_gen_then_solve_axial(tmp_path, capsys):
    f = tmp_path / "f.json"
    assert run(capsys, "gen", "--n", "3", "--d", "3", "--seed", "1", "--out", str(f))[0] == 0
    code, out, _ = run(capsys, "solve", "axial-greedy", "--input", str(f))
    doc = json.loads(out)
    assert code == 0 and is_latin_assignment(doc["K"])


def test_unknown_subcommand(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1 and "usage" in err


def test_bad_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "bound", "parisi", "--n", "ten")
    assert code == 1 and "usage" in err


def test_missing_instance_is_usage_error(capsys):
    assert run(capsys, "solve", "bilinear")[0] == 1


def test_runtime_error_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "solve", "bilinear", "--input", str(tmp_path / "missing.json"))
    assert code == 2 and err
    code, _, _ = run(capsys, "exact", "planar", "--n", "9")
    assert code == 2


def test_solve_planar_modes(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", "planar-bdts", "--n", "30", "--seed", "4", "--k", "1")
    doc = json.loads(out)
    assert code == 0 and doc["mode"] == "distributional"
    assert is_planar_assignment(list(zip(range(30), doc["sigma"], doc["pi"])), 30)
    f = tmp_path / "g.json"
    run(capsys, "gen", "--n", "12", "--seed", "2", "--out", str(f))
    code, out, _ = run(capsys, "solve", "planar-bdts", "--input", str(f))
    assert code == 0 and json.loads(out)["mode"] == "fixed"
    assert run(capsys, "solve", "planar-bdts", "--input", str(f), "--mode", "distributional")[0] == 1


def test_exact_and_bounds(tmp_path, capsys):
    f = tmp_path / "h.json"
    run(capsys, "gen", "--n", "3", "--seed", "5", "--out", str(f))
    _, out, _ = run(capsys, "exact", "planar", "--input", str(f))
    planar = json.loads(out)["cost"]
    _, out, _ = run(capsys, "exact", "axial", "--input", str(f))
    assert is_latin_assignment(json.loads(out)["K"])
    _, out, _ = run(capsys, "bound", "planar-rowmin", "--input", str(f))
    assert float(out) <= planar + 1e-6
    _, out, _ = run(capsys, "bound", "axial-slices", "--input", str(f))
    assert float(out) >= 0
    _, out, _ = run(capsys, "exact", "matching", "--n", "4", "--seed", "1")
    assert sorted(json.loads(out)["perm"]) == [0, 1, 2, 3]
    _, out, _ = run(capsys, "bound", "dfm", "--n", "15")
    assert out.strip() == "99.546870"
    _, out, _ = run(capsys, "bound", "dfm", "--n", "10", "--i", "10")
    assert out.strip() == "20.000000"


def test_bench_outputs(tmp_path, capsys):
    code, out, _ = run(capsys, "bench", "axial-greedy", "--n", "4", "6", "8", "--trials", "2", "--seed", "3")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("algo,n,k,seed") and len(lines) == 7
    f = tmp_path / "r.jsonl"
    code, out, _ = run(capsys, "bench", "matching", "--n", "5", "--trials", "3", "--format", "jsonl",
                       "--out", str(f), "--jobs", "2")
    assert code == 0 and out == "" and len(f.read_text().splitlines()) == 3


def test_console_script_entry():
    r = subprocess.run([sys.executable, "-m", "mdap.cli", "bound", "parisi", "--n", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "1.000000"
