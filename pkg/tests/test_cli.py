import json
import subprocess
import sys

import pytest

from lepoly.cli import main


def test_success_writes_report_dot_and_csv(tmp_path, capsys):
    rep, dot, csv = tmp_path / "r.json", tmp_path / "p.dot", tmp_path / "t.csv"
    code = main(["--f", "x^2+y^3", "--report", str(rep), "--dot", str(dot), "--csv", str(csv)])
    assert code == 0
    assert capsys.readouterr().out.strip() == "n=2 k=3 chi=-1 b0=1 b1=2 status=ok"
    d = json.loads(rep.read_text(encoding="utf-8"))
    assert d["polyhedron"]["b1"] == 2
    assert dot.read_text().startswith("graph LePolyhedron {")
    assert csv.read_text().startswith("path,kind,sample")


def test_report_to_stdout(capsys):
    assert main(["--f", "x", "--g", "y"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert (d["polyhedron"]["chi"], d["polyhedron"]["b0"], d["polyhedron"]["b1"]) == (0, 1, 1)


@pytest.mark.parametrize("argv,code", [
    (["--f", "x+"], 1),
    (["--f", "x", "--t", "soon"], 1),
    ([], 1),
    (["--f", "x^2+y", "--g", "y"], 2),
    (["--f", "x^2"], 2),
])
def test_exit_codes(argv, code, capsys):
    assert main(argv) == code


def test_failed_run_still_writes_a_report(tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert main(["--f", "x*y", "--g", "y", "--report", str(rep)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("lepoly: error:")
    assert "gcd(f,g) ≠ 1" in err
    d = json.loads(rep.read_text(encoding="utf-8"))
    assert d["status"] == "failed" and d["exit_code"] == 2


def test_reports_are_byte_identical_across_processes(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        subprocess.run([sys.executable, "-m", "lepoly.cli", "--f", "x^3-x*y^5+y^7", "--oracle",
                        "--report", str(path)], check=True, capture_output=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
