import json
import math
import subprocess
import sys

import pytest

from bicalc.cli import UsageError, main, parse_interval, parse_point, run

KEYS = {"command", "inputs", "result", "verdict", "trace", "error", "elapsed_s"}


def test_newton_int_example():
    code, rep = run(["newton-int", "-F", "x1^2*x2^3/2", "-a", "0,1", "-b", "2,3"])
    assert code == 0 and rep["result"]["value"] == 52 and rep["error"] is None


def test_improper_divergent_example():
    code, rep = run(["improper", "-F", "x1/(x1+x2)", "--interval", "(0,1]x(0,1]"])
    assert code == 0 and rep["verdict"] == "divergent"
    values = sorted(w["limit"] for w in rep["result"]["witnesses"])
    assert values[0] == pytest.approx(-1 / 6, abs=1e-6) and values[-1] == pytest.approx(0, abs=1e-6)


def test_parse_error_exit_code():
    code, rep = run(["deriv", "-f", "x1^2 +", "-a", "0,0"])
    assert code == 2
    assert rep["error"]["kind"] == "parse" and rep["error"]["position"] == 6
    assert rep["result"] is None


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["delta", "-f", "x1"],
                                  ["delta", "-f", "x1", "-a", "0", "-b", "1,1"]])
def test_usage_errors(argv):
    code, rep = run(argv)
    assert code == 1 and rep["error"]["kind"] in ("usage", "ValueError")


def test_numeric_error_exit_code():
    code, rep = run(["rolle", "-f", "x1*x2", "-i", "[0,1]x[0,1]"])
    assert code == 3 and rep["error"]["kind"] == "HypothesisError"
    code, rep = run(["eval", "-f", "ln(x1)", "-a", "-1,0"])
    assert code == 3 and rep["error"]["kind"] == "DomainError"


def test_strict_maps_unsettled_verdicts():
    argv = ["limit", "-g", "(x1*x2)/(x1^2+x2^2)", "-a", "0,0", "--sign", "++"]
    code, rep = run(argv)
    assert code == 0 and rep["verdict"] in ("diverged", "inconclusive")
    code, _ = run(["--strict"] + argv)
    assert code == 3


def test_negative_point_values():
    code, rep = run(["eval", "-f", "x1*x2", "-a", "-1.5,-2"])
    assert code == 0 and rep["result"]["value"] == 3.0


def test_point_and_interval_parsing():
    assert parse_point("inf,-inf", extended=True).as_tuple() == (math.inf, -math.inf)
    i = parse_interval("(0,inf)x[-1,1]")
    assert i.edge_closed == (False, False, True, True)
    with pytest.raises(UsageError):
        parse_interval("[0,1]")


@pytest.mark.parametrize("argv", [
    ["eval", "-f", "x1+x2", "-a", "1,2"],
    ["delta", "-f", "x1*x2", "-a", "0,0", "-b", "1,1"],
    ["delta-n", "-f", "x1*x2*x3", "--arity", "3", "-a", "0,0,0", "-b", "1,1,1"],
    ["slope", "-f", "x1^2*x2^3/2", "-a", "0,1", "-b", "2,3"],
    ["deriv", "-f", "x1^2*x2^3/2", "-a", "1,1"],
    ["schwarz", "-f", "sin(x1*x2)", "-a", "0,0"],
    ["continuity", "-f", "sin(x1*x2)", "-a", "0.5,0.5"],
    ["global-continuity", "-f", "x1^2*x2", "-i", "[0,1]x[0,1]"],
    ["double-constant", "-f", "x1^2+sin(x2)", "-i", "[0,1]x[0,1]"],
    ["split", "-f", "x1^2+sin(x2)", "-i", "[0,1]x[0,1]", "--anchor", "0,0"],
    ["intermediate", "-f", "x1+x2", "-i", "[0,1]x[0,1]", "-d", "1"],
    ["mvt", "-f", "x1^2*x2^2", "-i", "[0,1]x[0,1]"],
    ["cauchy-mvt", "-f", "x1^2*x2^2", "-g", "x1^2*x2", "-i", "[0,1]x[0,1]"],
    ["classify", "-f", "3*(x1-1)*(x2-1)", "-i", "[0,2]x[0,2]"],
    ["stationary", "-f", "x1^2*x2^2", "-c", "0,0", "-i", "[-1,1]x[-1,1]"],
    ["critical", "-f", "(x1-1)^2*(x2-2)^2", "-i", "[0,2]x[0,4]"],
    ["riemann-int", "-f", "3*x1*x2^2", "-i", "[0,2]x[1,3]"],
    ["integral-mean", "-f", "3*x1*x2^2", "-F", "x1^2*x2^3/2", "-i", "[0,2]x[1,3]"],
    ["ftc2", "-f", "3*x1*x2^2", "-F", "x1^2*x2^3/2", "-i", "[0,2]x[1,3]"],
    ["cov", "-f", "x1*x2", "--h1", "u", "--h2", "u*v", "--jacobian", "u", "-G", "u^4*v^2/8",
     "-i", "(0,1)x(0,1)"],
])
def test_commands_schema_and_determinism(argv):
    code, rep = run(argv)
    assert code == 0, rep["error"]
    assert set(rep) == KEYS and rep["result"] is not None and rep["error"] is None
    again = run(argv)[1]
    rep.pop("elapsed_s"), again.pop("elapsed_s")
    assert json.dumps(rep, sort_keys=True) == json.dumps(again, sort_keys=True)


def test_error_reports_keep_schema():
    _, rep = run(["eval", "-f", "x1 + + 2", "-a", "0,0"])
    assert set(rep) == KEYS and rep["result"] is None and rep["error"]["position"] == 5


def test_main_writes_strict_json(capsys):
    code = main(["improper", "-F", "x1/(x1+x2)", "-i", "(0,1]x(0,1]"])
    out = json.loads(capsys.readouterr().out)
    assert code == 0 and out["command"] == "improper"


def test_verify_command():
    code, rep = run(["verify", "--suite", "difference", "--seed", "42"])
    assert code == 0 and rep["result"]["failures"] == 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bicalc.cli", "newton-int", "-F", "x1^2*x2^3/2",
                           "-a", "0,1", "-b", "2,3"], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["value"] == 52
