import json
import subprocess
import sys

import pytest

from paraspin import fixtures
from paraspin.cli import EXIT_BAD_INPUT, EXIT_FIXTURE, EXIT_PRECISION, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classnum_json(capsys):
    code, out, _ = _run(capsys, "classnum", "-D", "-23", "--json")
    assert code == 0 and json.loads(out) == {"D": -23, "h": 3, "w": 2}


def test_curves_lists_all(capsys):
    code, out, _ = _run(capsys, "curves", "--json")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and [r["level"] for r in recs] == list(fixtures.LEVELS)
    assert all(r["nonsingular"] for r in recs)


def test_count_small(capsys, tmp_path):
    code, out, _ = _run(capsys, "count", "--level", "277", "--bound", "20", "--cache", str(tmp_path), "--json")
    qs = [json.loads(line)["q"] for line in out.splitlines()]
    assert code == 0 and qs == [2, 3, 5, 7, 11, 13, 17, 19]
    # a warm cache holding more primes does not widen the output
    _run(capsys, "count", "--level", "277", "--bound", "60", "--cache", str(tmp_path))
    code, out, _ = _run(capsys, "count", "--level", "277", "--bound", "20", "--cache", str(tmp_path), "--json")
    assert [json.loads(line)["q"] for line in out.splitlines()][-1] == 19


def test_lemma_check_passes(capsys):
    code, out, _ = _run(capsys, "lemma-check", "--level", "277", "--dmax", "120")
    assert code == 0 and "FAIL" not in out


def test_classes_mass(capsys):
    code, out, _ = _run(capsys, "classes", "--level", "277", "-D", "-23")
    assert code == 0 and out.strip().endswith("sum 1/eps = 3/2")


def test_grit_constant(capsys):
    code, out, _ = _run(capsys, "grit", "--level", "277", "--cstar", "const:1", "--dmax", "60")
    assert code == 0 and "MISMATCH" not in out and "D=-3: A(D) = 1/6" in out


def test_avg_from_file(capsys, tmp_path):
    path = tmp_path / "f.csv"
    path.write_text(fixtures.fixture_text("fourier_277_reconstructed.csv"))
    code, out, _ = _run(capsys, "avg", "--level", "277", "-D", "-40", "--coeff-file", str(path), "--json")
    assert code == 0 and json.loads(out)["A"] == "-6"


@pytest.mark.parametrize(
    "argv",
    [
        ["central", "--level", "999", "-D", "-3"],
        ["central", "--level", "587", "-D", "-3"],
        ["central", "--level", "277", "-D", "-12"],
        ["classes", "--level", "278", "-D", "-3"],
        ["classnum", "-D", "5"],
        ["grit", "--level", "277"],
        ["avg", "--level", "277", "-D", "-3", "--coeff-file", "/nonexistent.csv"],
    ],
)
def test_bad_input_exit_code(capsys, argv):
    code, _, err = _run(capsys, *argv)
    assert code == EXIT_BAD_INPUT and err.startswith("paraspin:")


def test_precision_exit_code(capsys, tmp_path):
    code, _, err = _run(capsys, "central", "--level", "277", "-D", "-131", "--nmax", "2000", "--tol", "1e-8", "--cache", str(tmp_path))
    assert code == EXIT_PRECISION and "--nmax" in err


def test_fixture_exit_code(capsys, monkeypatch):
    def broken(name):
        raise fixtures.FixtureError(f"fixture {name} missing")

    monkeypatch.setattr(fixtures, "_read", broken)
    code, _, err = _run(capsys, "curves")
    assert code == EXIT_FIXTURE and "missing" in err


def test_central_small(capsys, tmp_path):
    code, out, _ = _run(capsys, "central", "--level", "277", "-D", "-3", "--nmax", "20000", "--cache", str(tmp_path), "--json")
    rec = json.loads(out)
    assert code == 0 and rec["sign"] == 1
    assert abs(rec["normalized_with_table_C_F"] - 1.0) < 1e-3


def test_verify_json_deterministic(capsys, tmp_path):
    argv = ["verify", "--level", "277", "--dmin", "-30", "--nmax", "20000", "--cache", str(tmp_path), "--json"]
    _, first, _ = _run(capsys, *argv)
    _, second, _ = _run(capsys, *argv)
    assert first == second
    data = json.loads(first)
    assert data["level"] == "277" and [r["D"] for r in data["rows"]][0] == -3


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "paraspin.cli", "classnum", "-D", "-4"], capture_output=True, text=True)
    assert res.returncode == 0 and "h(-4) = 1, w = 4" in res.stdout
