import json

import pytest

from subdiff_lab.cli import run_command


def run(capsys, *argv):
    code = run_command(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_checkmin_sub_certified(capsys):
    code, out, _ = run(capsys, "checkmin-sub", "--func", "max(1*x,-1*x)", "--at", "0",
                       "--region", "box(-1,1)")
    assert code == 0 and json.loads(out)["verdict"] == "OptimalCertified"


def test_checkmin_dd_violation(capsys):
    code, out, _ = run(capsys, "checkmin-dd", "--func", "max(x,-x)", "--at", "0.5",
                       "--region", "box(-1,1)")
    assert code == 1 and json.loads(out)["verdict"] == "NotOptimal"


def test_refute(capsys):
    code, out, _ = run(capsys, "refute", "--func", "max(1*x,-1*x)", "--at", "0.5",
                       "--region", "box(-1,1)")
    w = json.loads(out)["witness"]
    assert code == 1 and w["inner"] > 0 and w["f_yeps"] < 0.5
    code, _, _ = run(capsys, "refute", "--func", "max(x,-x)", "--at", "0", "--region", "box(-1,1)")
    assert code == 0


def test_usage_errors(capsys):
    assert run(capsys, "eval", "--func", "x*y", "--at", "1")[0] == 3
    assert run(capsys, "eval", "--func", "max(x,-x)", "--at", "1,2")[0] == 3
    assert run(capsys, "bogus")[0] == 3
    assert run(capsys)[0] == 3
    assert run(capsys, "checkmin-dd", "--func", "x", "--at", "0")[0] == 3
    assert run(capsys, "dd", "--func", "x", "--at", "0")[0] == 3
    assert run(capsys, "maxmono", "--func", "min(x,-x)", "--region", "box(-1,1)")[0] == 3
    assert run(capsys, "eval", "--func", "@/nonexistent.plf", "--at", "0")[0] == 3
    assert run(capsys, "ekeland", "--func", "max(x,-x)", "--at", "0.9", "--eps", "0.1",
               "--lambda", "1")[0] == 3


def test_basic_commands(capsys):
    code, out, _ = run(capsys, "eval", "--func", "max(x,-x)", "--at", "-0.5")
    assert code == 0 and json.loads(out)["value"] == 0.5
    code, out, _ = run(capsys, "dd", "--func", "max(x,-x)", "--at", "0", "--dir", "-1")
    assert json.loads(out)["fprime"] == 1
    code, out, _ = run(capsys, "subdiff", "--func", "max(x1,x2)", "--at", "0 0")
    assert json.loads(out)["vertices"] == [[0, 1], [1, 0]]
    code, out, _ = run(capsys, "enlarge", "--func", "max(x,-x)", "--at", "0.5", "--eps", "0.1",
                       "--grid-h", "0.05", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "x1,fx,xstar1"
    code, out, _ = run(capsys, "link", "--func", "max(x,-x)", "--at", "0", "--dir", "1")
    assert code == 0 and json.loads(out)["pass"]


def test_variational_commands(capsys):
    code, out, _ = run(capsys, "ekeland", "--func", "max(x,-x)", "--at", "0.2", "--eps", "0.5",
                       "--lambda", "0.4")
    assert code == 0 and json.loads(out)["valid"]
    code, out, _ = run(capsys, "mvi", "--func", "max(x,-x)", "--from", "1", "--at", "-2",
                       "--lambda", "1")
    assert code == 0 and json.loads(out)["t0"] == pytest.approx(1 / 3)


def test_monotone_commands(capsys):
    code, out, _ = run(capsys, "absorb", "--func", "max(x,-x)", "--region", "box(-1,1)")
    assert code == 0 and json.loads(out)["pass"]
    code, out, _ = run(capsys, "maxmono", "--func", "max(2*x+1,-x)", "--region", "box(-1,1)")
    assert code == 0
    code, out, _ = run(capsys, "polar", "--func", "max(x,-x)", "--region", "box(-1,1)",
                       "--grid-h", "0.5", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "x1,xstar1"


def test_suite_subset_deterministic(capsys):
    args = ("suite", "--seed", "3", "--scale", "0.05", "--only", "4,12", "--format", "json")
    code, out1, _ = run(capsys, *args)
    _, out2, _ = run(capsys, *args)
    assert code == 0
    a, b = json.loads(out1), json.loads(out2)
    assert a["schema"] == "subdiff-lab-report/1"
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b
    assert [c["number"] for c in a["criteria"]] == [4, 12]
