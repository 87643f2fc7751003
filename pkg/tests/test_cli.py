import io
import json
import math
import subprocess
import sys

import pytest

from cpop.cli import parse_point, run, write_point
from cpop.errors import ParseError, UnknownVariable
from cpop.formats import read_cpop, write_cpop
from cpop.poly import Kind, Variable, abs2, conj
from cpop.problem import Problem
from cpop.realify import pb_cplx2real

from support import TWO_BUS_M, case_text, read_sdpa, two_bus_operating_point

x = Variable("x", Kind.COMPLEX)
R = -0.70710678


def call(*argv, stdin=None):
    out, err = io.StringIO(), io.StringIO()
    if stdin is not None:
        old = sys.stdin
        sys.stdin = io.StringIO(stdin)
    try:
        code = run([str(a) for a in argv], out, err)
    finally:
        if stdin is not None:
            sys.stdin = old
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def preal_file(tmp_path):
    pb = Problem().set_objective(0.5 * (x + conj(x) - 1j * (x - conj(x)))).add_equality("unit", abs2(x), 1)
    path = tmp_path / "preal.cpop"
    path.write_text(write_cpop(pb_cplx2real(pb)))
    return path


def report(text):
    return dict(line.split(" ", 1) for line in text.splitlines())


def test_check_preal_optimum(preal_file, tmp_path):
    point = tmp_path / "opt.pt"
    point.write_text(f"x_Re {R} 0\nx_Im {R} 0\n")
    code, out, err = call("check", preal_file, point, "--feastol", "1e-6")
    assert code == 0, err
    rep = report(out)
    assert rep["feasible"] == "yes"
    assert float(rep["objective"]) == pytest.approx(-1.41421356, abs=1e-8)


def test_check_infeasible_exits_two(preal_file, tmp_path):
    point = tmp_path / "bad.pt"
    point.write_text("x_Re 0 0\nx_Im 0 0\n")
    code, out, _ = call("check", preal_file, point)
    assert code == 2
    assert report(out)["worst_constraint"] == "unit"


def test_eval_lists_constraint_values(preal_file, tmp_path):
    point = tmp_path / "p.pt"
    point.write_text("# comment\nx_Re 0.6 0\n\nx_Im 0.8 0\n")
    code, out, _ = call("eval", preal_file, point)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "objective 1.4"
    name, re, im, viol = lines[1].split()
    assert name == "unit" and float(re) == pytest.approx(1.0) and float(viol) == pytest.approx(0.0, abs=1e-15)


def test_relax_order_validation(preal_file):
    code, out, err = call("relax", preal_file, "--order", "0")
    assert code == 1 and out == ""
    assert err.startswith("cpop relax:")


def test_relax_writes_sdpa(preal_file, tmp_path):
    dest = tmp_path / "preal.dat-s"
    code, out, _ = call("relax", preal_file, "--order", "1", "-o", dest)
    assert code == 0 and out == ""
    m, sizes, _, _, _ = read_sdpa(dest.read_text())
    assert (m, sizes) == (5, [3, 1, 1])


def test_build_acopf_case14(tmp_path):
    case = tmp_path / "case14.m"
    case.write_text(case_text(14))
    code, out, _ = call("build-acopf", case)
    assert code == 0
    pb = read_cpop(out)
    ngen = sum(1 for n in pb.variables if n.startswith("Sgen_"))
    complex_vars = [ln for ln in out.splitlines() if ln.startswith("VAR ") and ln.endswith(" COMPLEX")]
    assert len(complex_vars) == 14 + ngen == 19


def test_build_pscopf(tmp_path):
    case = tmp_path / "case9.m"
    case.write_text(case_text(9))
    doc = tmp_path / "k.json"
    doc.write_text(json.dumps({"contingencies": [{"id": "l14", "type": "branch", "from": 1, "to": 4}]}))
    code, out, err = call("build-pscopf", case, doc, "--big-m-v", "0.5")
    assert code == 0, err
    pb = read_cpop(out)
    assert "Delta_l14" in pb.variables
    assert pb.variables["bplus_l14_2_1"].kind is Kind.BOOL
    bad = tmp_path / "bad.json"
    bad.write_text('{"contingencies": [{"id": "x", "type": "branch", "from": 1, "to": 2}]}')
    code, _, err = call("build-pscopf", case, bad)
    assert code == 1 and err.startswith("cpop build-pscopf:")


def test_pipeline_with_newton_point(tmp_path):
    case = tmp_path / "two.m"
    case.write_text(TWO_BUS_M)
    code, acopf, _ = call("build-acopf", case)
    assert code == 0
    code, real, _ = call("convert", "-", stdin=acopf)
    assert code == 0
    v, s_gen = two_bus_operating_point()
    point = tmp_path / "pf.pt"
    lines = []
    for name, z in [("V_base_1", v[0]), ("V_base_2", v[1]), ("Sgen_base_1_1", s_gen)]:
        lines += [f"{name}_Re {float(z.real)!r} 0", f"{name}_Im {float(z.imag)!r} 0"]
    point.write_text("\n".join(lines) + "\n")
    code, out, err = call("check", "-", point, "--feastol", "1e-6", stdin=real)
    assert code == 0, out + err


def test_outputs_are_deterministic(tmp_path):
    case = tmp_path / "case14.m"
    case.write_text(case_text(14))
    first = call("build-acopf", case)[1]
    second = call("build-acopf", case)[1]
    assert first.encode() == second.encode()
    a = call("convert", "-", stdin=first)[1]
    b = call("convert", "-", stdin=second)[1]
    assert a.encode() == b.encode()


def test_solve_preal(preal_file):
    code, out, err = call("solve", preal_file, "--box", "x_Re=-1.5:1.5", "--box", "x_Im=-1.5:1.5")
    assert code == 0, err
    rep = report(out)
    assert rep["status"] == "feasible"
    assert float(rep["objective"]) == pytest.approx(-math.sqrt(2), abs=1e-3)


def test_solve_reports_bad_box(preal_file):
    code, _, err = call("solve", preal_file, "--box", "x_Re")
    assert code == 1 and "name=lo:hi" in err


def test_parse_errors_exit_one(tmp_path):
    bad = tmp_path / "bad.cpop"
    bad.write_text("VAR x REAL\nOBJ MONO y 1 0\n")
    code, _, err = call("convert", bad)
    assert code == 1 and "line 2" in err
    assert call("convert", tmp_path / "missing.cpop")[0] == 1
    assert call("nosuchcommand")[0] == 1
    assert call()[0] == 1


def test_point_files():
    pb = pb_cplx2real(Problem().add_equality("unit", abs2(x), 1))
    pt = parse_point("x_Re 0.5 0\nx_Im -0.25 0  # trailing\n", pb)
    assert write_point(pt) == "x_Im -0.25 0\nx_Re 0.5 0\n"
    with pytest.raises(UnknownVariable):
        parse_point("y 1 0\n", pb)
    with pytest.raises(ParseError):
        parse_point("x_Re 1\n", pb)
    with pytest.raises(ParseError):
        parse_point("x_Re one 0\n", pb)


def test_console_module_runs(preal_file):
    proc = subprocess.run([sys.executable, "-m", "cpop.cli", "relax", str(preal_file), "--order", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[:3] == ["5", "3", "3 1 1"]
