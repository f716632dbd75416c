import json
import subprocess
import sys

import pytest

from mhessian.cli import main


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_trace_identity(capsys):
    code, out, _ = run(["trace", "[[1,0,0],[0,1,0],[0,0,1]]"], capsys)
    assert code == 0
    assert json.loads(out)["traces"] == [1.0, 3.0, 3.0, 1.0]


def test_trace_diag(capsys, tmp_path):
    path = tmp_path / "m.json"
    path.write_text("[[1,0,0],[0,2,0],[0,0,3]]")
    code, out, _ = run(["trace", str(path), "--m", "2", "--out", str(tmp_path / "t.json")], capsys)
    data = json.loads(out)
    assert code == 0 and data["m_trace"] == pytest.approx(11.0)
    assert data["cone"]["member"]
    assert json.loads((tmp_path / "t.json").read_text()) == data


@pytest.mark.parametrize("arg", ["[[1,2", "[[1,2],[3]]", '"x"', "[[1, \"a\"], [2, 3]]"])
def test_trace_malformed(capsys, arg):
    code, _, err = run(["trace", arg], capsys)
    assert code == 2 and "error" in err


def test_solve_ball(capsys, tmp_path):
    code, out, _ = run(["solve", "--domain", "ball", "--n", "3", "--m", "2", "--out", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads((tmp_path / "solution.json").read_text())
    assert data["solution"]["residual_inf"] <= 1e-9
    assert data["solution"]["hessian_integrals"]["2"] == pytest.approx(0.48367983046, rel=1e-9)
    assert (tmp_path / "solution.csv").read_text().startswith("r,w\n")
    assert "residual" in out and "I_2" in out


def test_solve_disc_quotient(capsys, tmp_path):
    code, _, _ = run(["solve", "--domain", "disc", "--m", "2", "--l", "1", "--grid", "32",
                      "--out", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads((tmp_path / "solution.json").read_text())
    assert data["solution"]["a_estimate"] == pytest.approx(2.0, abs=1e-8)
    assert data["kind"] == "polar"


def test_solve_errors(capsys, tmp_path):
    assert run(["solve", "--domain", "ball", "--n", "3", "--m", "4", "--out", str(tmp_path)], capsys)[0] == 2
    assert run(["solve", "--domain", "ball", "--n", "3", "--m", "2", "--l", "2"], capsys)[0] == 2
    assert run(["solve", "--n", "3", "--m", "2", "--tol", "0"], capsys)[0] == 2
    assert run(["solve", "--n", "3", "--m", "2", "--psi", "-1"], capsys)[0] == 2
    assert run(["solve", "--n", "3", "--m", "2", "--tol", "1e-30", "--out", str(tmp_path)], capsys)[0] == 4


def test_verify_maclaurin(capsys, tmp_path):
    code, out, _ = run(["verify", "maclaurin", "--samples", "2000", "--seed", "7", "--out", str(tmp_path)],
                       capsys)
    assert code == 0 and "PASS" in out
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["summary"]["failed"] == 0 and rep["schema_version"] == 1
    assert (tmp_path / "report.csv").read_text().startswith("name,m,l,lhs,rhs,margin,verdict\n")


def test_verify_errors(capsys, tmp_path):
    assert run(["verify", "nonsense", "--out", str(tmp_path)], capsys)[0] == 2
    assert run(["verify", "--out", str(tmp_path)], capsys)[0] == 2
    assert run(["verify", "all", "poincare", "--out", str(tmp_path)], capsys)[0] == 2
    assert run(["verify", "poincare", "--samples", "0", "--out", str(tmp_path)], capsys)[0] == 2


def test_verify_deterministic(capsys, tmp_path):
    args = ["verify", "poincare", "anpo", "--n", "3", "--samples", "5", "--seed", "3"]
    run(args + ["--out", str(tmp_path / "a")], capsys)
    run(args + ["--out", str(tmp_path / "b")], capsys)
    for name in ("report.json", "report.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_plotdata(capsys, tmp_path):
    run(["solve", "--n", "3", "--m", "2", "--out", str(tmp_path / "s")], capsys)
    code, out, _ = run(["plotdata", str(tmp_path / "s" / "solution.json")], capsys)
    assert code == 0 and out.splitlines()[0] == "r,w" and len(out.splitlines()) == 130
    run(["solve", "--domain", "disc", "--m", "2", "--grid", "16", "--out", str(tmp_path / "d")], capsys)
    code, out, _ = run(["plotdata", str(tmp_path / "d" / "solution.json")], capsys)
    assert out.splitlines()[0] == "r,theta,w" and len(out.splitlines()) == 16 * 16 + 1
    run(["verify", "w2", "--n", "3", "--out", str(tmp_path / "v")], capsys)
    code, out, _ = run(["plotdata", str(tmp_path / "v" / "report.json"), "--out", str(tmp_path / "p.csv")],
                       capsys)
    assert code == 0 and (tmp_path / "p.csv").read_text().startswith("index,name,m,l,margin\n")
    assert run(["plotdata", str(tmp_path / "missing.json")], capsys)[0] == 2


def test_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 3, "m": 2, "l": 1, "out": str(tmp_path / "o")}))
    code, out, _ = run(["solve", "--config", str(cfg)], capsys)
    assert code == 0 and "l=1" in out
    code, out, _ = run(["solve", "--config", str(cfg), "--l", "0"], capsys)
    assert "l=0" in out
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["solve", "--config", str(cfg)], capsys)[0] == 2


def test_usage_exit(capsys):
    assert main([]) == 2
    assert main(["solve", "--m", "x"]) == 2


def test_console_script(tmp_path):
    out = subprocess.run([sys.executable, "-m", "mhessian.cli", "trace", "[[2,0],[0,1]]"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["m_trace"] == 2.0


def test_gate_exit(capsys, tmp_path, monkeypatch):
    from mhessian import solver
    monkeypatch.setattr(solver, "is_boundary_m_convex", lambda dom, m: (False, -0.5))
    code, _, err = run(["solve", "--domain", "disc", "--m", "2", "--out", str(tmp_path)], capsys)
    assert code == 3 and "convexity gate" in err
