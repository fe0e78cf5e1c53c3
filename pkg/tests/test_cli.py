import json
import math
import subprocess
import sys

import pytest

from conftest import MODELS
from sizebias.cli import main
from sizebias.harness import read_tail_csv


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


def test_bounds_at_zero(capsys):
    code, obj = run_json(capsys, "bounds", "--mu", 1, "--sigma", 1, "--K", 1, "--t", 0)
    assert code == 0 and obj["lower"] == 1 and obj["upper"] == 1
    assert obj["K1"] == 2 and obj["K2"] == 0.5


def test_bounds_upper_value(capsys):
    code, obj = run_json(capsys, "bounds", "--mu", 1, "--sigma", 1, "--K", 1, "--t", 2)
    assert code == 0
    assert obj["upper"] == pytest.approx(math.exp(-2 / 3), rel=1e-15)


def test_bounds_pattern_constants(capsys):
    code, obj = run_json(capsys, "bounds", "--pattern", "--n", 100, "--m", 3, "--k", 1)
    assert code == 0
    assert obj["K1"] == 30 and obj["K2"] == pytest.approx(1.5)
    assert obj["K1_derived"] == 60


def test_bounds_univariate_and_iid(capsys):
    _, obj = run_json(capsys, "bounds", "--univariate", "--mu", 4, "--K", 1, "--t", 4)
    assert obj["lower"] == pytest.approx(math.exp(-1))
    _, obj = run_json(capsys, "bounds", "--iid", "--mu", 0.5, "--sigma", 0.5, "--K", 1, "--t", "1,1,1,1")
    assert obj["upper"] == pytest.approx(math.exp(-0.2))


@pytest.mark.parametrize(
    "argv",
    [
        ["bounds", "--mu", "1", "--sigma", "1", "--K", "1", "--t", "-1"],
        ["bounds", "--mu", "1", "--sigma", "0", "--K", "1", "--t", "1"],
        ["bounds", "--mu", "1", "--K", "1"],
        ["bounds", "--pattern", "--n", "10", "--m", "2", "--k", "1"],
        ["verify", "--model", str(MODELS / "pattern_n12.json")],  # no seed
        ["verify", "--model", "x.json", "--seed", "-3"],
        ["patterns", "reorder", "--perm", "2,4,1,3", "--tau", "1,2,3", "--beta", "9"],
        ["patterns", "count", "--tau", "1,2,3"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(capsys, argv):
    assert main(argv) == 2


def test_oracle_identity_n6(capsys):
    code, obj = run_json(capsys, "oracle", "--model", MODELS / "pattern_n6_identity.json")
    assert code == 0
    assert obj["moments"]["mu"] == ["1"] and obj["moments"]["sigma2"] == ["23/30"]
    assert obj["audits"][0]["size_biased"] is True
    assert obj["verdict"] == "PASS"
    assert all(row["margin"] >= -1e-12 for row in obj["tails"])


def test_oracle_state_space_too_large(capsys):
    code, _, err = run(capsys, "oracle", "--model", MODELS / "pattern_n12.json")
    assert code == 3
    assert str(math.factorial(12)) in err


def test_oracle_local_cycle(capsys):
    code, obj = run_json(capsys, "oracle", "--model", MODELS / "local_cycle5.json")
    assert code == 0
    assert obj["local"]["b"] == 3
    assert obj["local"]["radius"] == pytest.approx(math.sqrt(3), rel=1e-15)


def test_oracle_out_file(capsys, tmp_path):
    out = tmp_path / "audit.json"
    code, stdout, _ = run(capsys, "oracle", "--model", MODELS / "independent3.json", "--out", out)
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["verdict"] == "PASS"


@pytest.mark.parametrize(
    "content",
    [
        "{not json",
        '{"type": "pattern", "n": 6, "patterns": [[1, 2, 3]], "extra": 1}',
        '{"type": "galaxy"}',
        '{"type": "independent", "components": [{"k": 1, "atoms": [{"x": ["1"], "p": "1/2"}]}]}',
    ],
)
def test_model_errors(capsys, tmp_path, content):
    path = tmp_path / "m.json"
    path.write_text(content)
    assert main(["oracle", "--model", str(path)]) == 3


def test_missing_model_file(capsys, tmp_path):
    assert main(["oracle", "--model", str(tmp_path / "nope.json")]) == 3


def test_verify_broken_fixture_fails(capsys):
    code, obj = run_json(
        capsys, "verify", "--model", MODELS / "pattern_n20_broken.json", "--seed", 42,
        "--samples", 20000,
    )
    assert code == 1 and obj["verdict"] == "FAIL"


def test_verify_rerun_is_byte_identical(capsys, tmp_path, monkeypatch):
    argv = ["verify", "--model", MODELS / "local_cycle5.json", "--seed", 7, "--samples", 5000]
    code, first, _ = run(capsys, *argv)
    assert code == 0
    _, second, _ = run(capsys, *argv)
    _, third, _ = run(capsys, *argv, "--workers", 3)
    monkeypatch.setenv("SIZEBIAS_WORKERS", "2")
    _, fourth, _ = run(capsys, *argv)
    assert first == second == third == fourth


def test_verify_csv_roundtrip(capsys):
    argv = ["verify", "--model", MODELS / "pattern_n6_identity.json", "--seed", 1,
            "--samples", 3000, "--format", "csv", "--t-grid", "0,0.5,1.5"]
    code, out, _ = run(capsys, *argv)
    assert code == 0
    rows = read_tail_csv(out)
    assert [r.t_norm for r in rows] == [0, 0.5, 1.5]
    _, again, _ = run(capsys, *argv)
    assert again == out


def test_patterns_subcommands(capsys):
    _, obj = run_json(capsys, "patterns", "count", "--perm", "1,2,3,4,5,6", "--tau", "1,2,3")
    assert obj["count"] == 4
    _, obj = run_json(capsys, "patterns", "count", "--perm", "2,4,1,3", "--tau", "1,3,2")
    assert obj["count"] == 1
    _, obj = run_json(capsys, "patterns", "reorder", "--perm", "2,4,1,3", "--tau", "2,1,3", "--beta", 1)
    assert obj["reordered"] == [2, 1, 4, 3]
    _, obj = run_json(capsys, "patterns", "moments", "--n", 6, "--tau", "1,3,2")
    assert obj["mean"] == "1"
    assert obj["variance_formula"] == "4/15" and obj["variance_exact"] == "7/15"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sizebias", "bounds", "--mu", "1", "--sigma", "1", "--K", "1", "--t", "0"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["lower"] == 1
