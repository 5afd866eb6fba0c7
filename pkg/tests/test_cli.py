from __future__ import annotations

import json
import math
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from prabhakar.cli import main

SCHEMAS = Path(__file__).resolve().parent.parent / "schemas"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def validate(command: str, text: str) -> dict:
    doc = json.loads(text)
    schema = json.loads((SCHEMAS / f"{command}.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
    return doc


def test_pmf_csv_row(capsys):
    code, out, _ = run(capsys, "pmf", "--t", "2", "--n-max", "5")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].split(",")[:2] == ["n", "p"]
    n, p = lines[4].split(",")[:2]
    assert n == "3" and float(p) == pytest.approx(math.exp(-2) * 8 / 6, rel=1e-14)


JSON_CASES = [
    ("ml", ["--mu", "0.5", "--z", "-1"]),
    ("ml", ["--mu", "0.7", "--gamma", "1.3", "--nu", "1.1", "--z", "0.5+1j", "--deriv", "2"]),
    ("pmf", ["--mu", "0.8", "--nu", "1.2", "--gamma", "1.1", "--sigma", "0.7", "--t", "1.5"]),
    ("moments", ["--mu", "0.6", "--t", "2", "--order", "5"]),
    ("interarrival", ["--mu", "0.8", "--gamma", "1.2", "--sigma", "0.8", "--tau", "0,0.5,2"]),
    ("sample", ["--mu", "0.8", "--gamma", "1.2", "--sigma", "0.8", "--count", "20", "--seed", "5"]),
    ("sample", ["--what", "count", "--t", "3", "--count", "20", "--seed", "5"]),
    ("compound", ["--t", "2", "--jump", "gaussian:1,0.5", "--paths", "2000", "--seed", "1"]),
    ("compound", ["--t", "2", "--jump", "constant:1", "--paths", "50", "--samples"]),
    ("bell", ["--mu", "0.5", "--max-m", "6"]),
    ("stirling", ["--mu", "0.5", "--max-m", "5"]),
    ("coherent", ["--mu", "0.5", "--sigma", "0.5", "--re", "0.6", "--im", "0.8", "--omega-t", "1.0"]),
]


@pytest.mark.parametrize("command, args", JSON_CASES, ids=[f"{c}-{i}" for i, (c, _) in enumerate(JSON_CASES)])
def test_json_output_matches_schema(capsys, command, args):
    code, out, _ = run(capsys, command, *args, "--format", "json")
    assert code == 0
    doc = validate(command, out)
    assert doc["command"] == command


@pytest.mark.parametrize("command, args", JSON_CASES, ids=[f"{c}-{i}" for i, (c, _) in enumerate(JSON_CASES)])
def test_csv_output_runs(capsys, command, args):
    code, out, _ = run(capsys, command, *args)
    assert code == 0 and out.strip()


def test_ml_json_value(capsys):
    _, out, _ = run(capsys, "ml", "--mu", "0.5", "--z", "-1", "--format", "json")
    doc = json.loads(out)
    assert doc["result"]["value"]["re"] == pytest.approx(0.4275835761558070, rel=1e-14)


def test_sample_bytes_reproducible(capsys, tmp_path):
    args = ["sample", "--mu", "0.8", "--gamma", "1.2", "--sigma", "0.8", "--count", "50", "--seed", "42"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("# ")
    assert main(["sample", "--mu", "0.8", "--gamma", "1.2", "--sigma", "0.8", "--count", "50", "--seed", "43", "--output", str(b)]) == 0
    assert a.read_bytes() != b.read_bytes()


def test_compound_empirical_csv(capsys, tmp_path):
    f = tmp_path / "j.csv"
    f.write_text("size\n1\n2\n3\n")
    code, out, _ = run(capsys, "compound", "--t", "1", "--jump", f"empirical-csv:{f}:size", "--paths", "500", "--format", "json")
    assert code == 0
    assert validate("compound", out)["result"]["analytic_mean"] == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize(
    "argv",
    [
        ["pmf", "--mu", "1.5", "--t", "1"],
        ["pmf", "--nu", "0.1", "--gamma", "1", "--t", "1"],
        ["pmf", "--t", "-1"],
        ["pmf"],
        ["coherent", "--n-max", "-3"],
        ["sample", "--count", "5", "--seed", "-1"],
        ["compound", "--t", "1", "--jump", "cauchy:0,1"],
        ["compound", "--t", "1", "--jump", "exponential:0"],
        ["nosuchcommand"],
        ["ml", "--z", "not-a-number"],
        ["interarrival", "--tau", "-2"],
    ],
)
def test_invalid_input_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1
    assert out == "" and err.startswith("error:")


def test_numeric_failure_exit_2(capsys):
    code, out, err = run(capsys, "ml", "--mu", "0.5", "--z", "-30")
    assert code == 2 and out == "" and "numeric failure" in err


def test_help_exits_cleanly():
    r = subprocess.run([sys.executable, "-m", "prabhakar.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for command in ("ml", "pmf", "moments", "interarrival", "sample", "compound", "bell", "stirling", "coherent", "verify"):
        assert command in r.stdout


def test_console_script():
    r = subprocess.run(["prabhakar", "pmf", "--t", "1", "--n-max", "1"], capture_output=True, text=True)
    assert r.returncode == 0
    assert float(r.stdout.splitlines()[1].split(",")[1]) == pytest.approx(math.exp(-1), rel=1e-15)


@pytest.mark.slow
def test_verify_quick(capsys):
    code, out, _ = run(capsys, "verify", "--quick", "--format", "json")
    doc = validate("verify", out)
    assert code == 0 and doc["result"]["all_passed"]
    assert len(doc["result"]["checks"]) == 10
