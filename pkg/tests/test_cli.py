import json
import subprocess
import sys

import numpy as np
import pytest

from hardylab import cli, io
from hardylab.dyadic import DyadicFunction


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def test_norms_builtin_examples(tmp_path):
    assert run(tmp_path, "norms") == 0
    summary = json.loads((tmp_path / "norms_summary.json").read_text())
    assert summary["passed"] is True
    assert "out" not in summary["config"]


def test_norms_from_file(tmp_path, rng):
    f = tmp_path / "f.csv"
    io.write_dyadic(DyadicFunction(rng.normal(size=32)), f)
    assert cli.main(["norms", "--input", str(f), "--out", str(tmp_path / "o")]) == 0
    rows = (tmp_path / "o" / "norms.csv").read_text().splitlines()
    assert rows[0].startswith("resolution,l1,l2,h1")


def test_norms_bad_input_is_config_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("nonsense\n")
    assert cli.main(["norms", "--input", str(bad), "--out", str(tmp_path)]) == 2


def test_config_errors_exit_2(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert cli.main(["stein", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert run(tmp_path, "stein", "--pair", "primes") == 2
    assert run(tmp_path, "kclosed", "--resolution", "14") == 2
    assert run(tmp_path, "stein", "--seed", "-3") == 2


def test_flags_override_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 1, "trials": 2, "n": 3}))
    assert cli.main(["multiplier", "--config", str(cfg), "--seed", "4", "--out", str(tmp_path)]) == 0
    echoed = json.loads(capsys.readouterr().out.splitlines()[0])
    assert echoed["seed"] == 4 and echoed["trials"] == 2 and echoed["n"] == 3


def test_trees_csv_is_nonincreasing(tmp_path):
    assert run(tmp_path, "trees", "--height", "6") == 0
    lines = (tmp_path / "trees.csv").read_text().splitlines()
    assert lines[0] == "height,best_ratio,evaluations"
    ratios = [float(l.split(",")[1]) for l in lines[1:]]
    assert len(ratios) == 6 and all(b <= a for a, b in zip(ratios, ratios[1:]))


def test_verify_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["verify", "--seed", "7", "--only", "1", "5", "7", "14", "--out", str(out)]) == 0
    assert (a / "verify_summary.json").read_bytes() == (b / "verify_summary.json").read_bytes()
    assert (a / "verify.csv").read_bytes() == (b / "verify.csv").read_bytes()


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "hardylab.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "HARDYLAB_THREADS" in out.stdout and "max_degree" in out.stdout
    bad = subprocess.run([sys.executable, "-m", "hardylab.cli", "nope"], capture_output=True, text=True)
    assert bad.returncode == 2
