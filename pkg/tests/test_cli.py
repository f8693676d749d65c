import json

import pytest

from pvadirac.cli import EXIT_DEGENERATE, EXIT_FAIL, EXIT_INPUT, EXIT_OK, main, run_command
from pvadirac.model import parse_model

BAD = "[algebra]\ngenerators = u\n\n[structure W]\nH[1][1] = u''*dinv*u''\n"


@pytest.fixture
def bad_model(tmp_path):
    path = tmp_path / "bad.pva"
    path.write_text(BAD)
    return str(path)


def test_check_single_structure_lists_every_triple():
    code, out = run_command(["check", "sl3min", "--structure", "H1"])
    assert code == EXIT_OK
    lines = [l for l in out.splitlines() if l.startswith("JACOBI") and ": PASS" in l]
    assert len(lines) == 64
    assert "FAIL" not in out


def test_check_failure_exit_code(bad_model):
    code, out = run_command(["check", bad_model, "--depth", "6"])
    assert code == EXIT_FAIL
    assert "JACOBI (1,1,1): FAIL" in out


def test_input_errors(tmp_path):
    assert run_command(["check", "missing.pva"])[0] == EXIT_INPUT
    broken = tmp_path / "broken.pva"
    broken.write_text("[algebra]\ngenerators = u\n[structure H]\nH[1][1] = d +\n")
    code, out = run_command(["check", str(broken)])
    assert code == EXIT_INPUT and "line 4" in out
    assert run_command(["bogus"])[0] == EXIT_INPUT
    assert run_command(["check", "sl3min", "--structure", "nope"])[0] == EXIT_INPUT
    code, _ = run_command(["dirac", "sl3min", "--structure", "H1", "--constraints", "phi",
                           "--depth", "0"])
    assert code == EXIT_INPUT


def test_degenerate_exit_code():
    code, out = run_command(["dirac", "sl3min", "--structure", "H0", "--constraints", "phi"])
    assert code == EXIT_DEGENERATE
    assert "NotInvertible" in out


def test_dirac_emits_parseable_fragment():
    code, out = run_command(["dirac", "sl3min", "--structure", "H1", "--constraints", "phi",
                             "--reduce", "--emit", "json"])
    assert code == EXIT_OK
    doc = json.loads(out)
    frag = [s for s in doc if s.get("title") == "reduced structure (model fragment)"][0]["text"]
    got = parse_model(frag).structure("H1_reduced").wnl
    want = parse_model("sl3red").structure("H1D").wnl
    assert got.equals(want, 8)


def test_json_is_deterministic():
    argv = ["check", "sl3red", "--structure", "H1D", "--emit", "json", "--depth", "4"]
    a = run_command(argv)
    b = run_command(argv)
    assert a == b and a[0] == EXIT_OK
    doc = json.loads(a[1])
    assert doc[1]["passed"] is True and len(doc[1]["lines"]) == 27


def test_bracket_command():
    code, out = run_command(["bracket", "sl3min", "--structure", "H1", "--left", "psi_p",
                             "--right", "psi_m", "--dirac", "phi", "--depth", "2"])
    assert code == EXIT_OK
    assert "lambda^2" in out and "lambda^-1" in out
    code, out = run_command(["bracket", "sl3min", "--structure", "H0", "--left", "L",
                             "--right", "L"])
    assert code == EXIT_OK and "(-2)*lambda" in out


def test_hierarchy_command():
    code, out = run_command(["hierarchy", "sl3red", "--h0", "H0C", "--h1", "H1D",
                             "--seed", "L", "--steps", "2"])
    assert code == EXIT_OK, out
    assert "STEP 1 H1D: g_1 <-> P_1: PASS" in out
    code, _ = run_command(["hierarchy", "sl3red", "--h0", "H0C", "--h1", "H1D",
                           "--seed", "L", "--steps", "-1"])
    assert code == EXIT_INPUT


def test_main_prints(capsys):
    assert main(["dirac", "sl3min", "--structure", "H0", "--constraints", "phi"]) == 3
    assert "NotInvertible" in capsys.readouterr().out
