"""Shared builders and independent oracles for the test suite.

The oracles here never call into the code under test for the quantity
they check: polynomials are evaluated from raw term lists with Python
complex arithmetic, and power flows are solved by a small Newton method
on an admittance matrix assembled from textbook branch formulas.
"""

from __future__ import annotations

import cmath
import itertools
import math
from importlib import resources

import numpy as np

from cpop.builders import Contingency, build_pscopf
from cpop.network import (
    Link,
    Network,
    branch_admittance,
    generator_element,
    load_element,
    pi_line_element,
    shunt_element,
    voltage_element,
)
from cpop.poly import Kind, Point, Polynomial, Variable, evaluate
from cpop.problem import Problem

KINDS = (Kind.COMPLEX, Kind.REAL, Kind.BOOL)


def case_text(n: int) -> str:
    return resources.files("cpop").joinpath(f"data/case{n}.m").read_text()


# ---------------------------------------------------------------- polynomials

def random_variables(rng, count, kinds=KINDS, prefix="v"):
    return [Variable(f"{prefix}{i}", kinds[rng.integers(len(kinds))]) for i in range(count)]


def random_terms(rng, variables, nterms=4, maxdeg=3, integer=False):
    """Raw terms ``(coef, [(var, expl, conj), ...])`` independent of Polynomial."""
    terms = []
    for _ in range(nterms):
        if integer:
            coef = complex(int(rng.integers(-5, 6)), int(rng.integers(-5, 6)))
        else:
            coef = complex(*rng.normal(size=2))
        factors = []
        for _ in range(int(rng.integers(0, maxdeg + 1))):
            var = variables[rng.integers(len(variables))]
            conj = int(var.kind is Kind.COMPLEX and rng.random() < 0.5)
            factors.append((var, 1 - conj, conj))
        terms.append((coef, factors))
    return terms


def terms_to_poly(terms) -> Polynomial:
    out = Polynomial()
    for coef, factors in terms:
        mono = Polynomial.constant(coef)
        for var, expl, conj in factors:
            mono = mono * (Polynomial.from_variable(var, conj=bool(conj)))
        out = out + mono
    return out


def naive_eval(terms, values) -> complex:
    total = 0j
    for coef, factors in terms:
        term = coef
        for var, expl, conj in factors:
            z = values[var]
            term *= z.conjugate() if conj else z
        total += term
    return total


def random_values(rng, variables, scale=1.0):
    out = {}
    for var in variables:
        if var.kind is Kind.COMPLEX:
            out[var] = complex(*(scale * rng.normal(size=2)))
        elif var.kind is Kind.REAL:
            out[var] = complex(scale * rng.normal(), 0.0)
        else:
            out[var] = complex(float(rng.integers(0, 2)), 0.0)
    return out


def random_problem(rng, nvars=4, ncons=3, integer=False) -> Problem:
    variables = random_variables(rng, nvars)
    pb = Problem()
    for v in variables:
        pb.register(v)
    p = terms_to_poly(random_terms(rng, variables, integer=integer))
    pb.set_objective(p + p.conj())
    for k in range(ncons):
        body = terms_to_poly(random_terms(rng, variables, integer=integer))
        choice = rng.integers(4)
        if choice == 0:
            lo = hi = complex(*rng.normal(size=2))
        elif choice == 1:
            lo, hi = complex(-1.0, -2.0), complex(1.5, 0.25)
        elif choice == 2:
            lo, hi = None, complex(rng.normal(), 0.0)
        else:
            lo, hi = complex(rng.normal(), 0.5), None
        pb.add_constraint(f"c{k}", body, lo, hi)
    return pb


# ---------------------------------------------------------------------- SDPA

def read_sdpa(text):
    """Minimal sparse SDPA reader: returns m, sizes, c and per-block F_0..F_m."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    m = int(lines[0])
    nblocks = int(lines[1])
    sizes = [int(s) for s in lines[2].split()]
    assert len(sizes) == nblocks
    c = np.array([float(s) for s in lines[3].split()])
    mats = [np.zeros((m + 1, abs(s), abs(s))) for s in sizes]
    for ln in lines[4:]:
        mat, blk, i, j, val = ln.split()
        mat, blk, i, j = int(mat), int(blk), int(i), int(j)
        assert i <= j
        mats[blk - 1][mat, i - 1, j - 1] = float(val)
        mats[blk - 1][mat, j - 1, i - 1] = float(val)
    return m, sizes, c, mats, lines[4:]


def preal_dual_certificate():
    """Hand-derived dual blocks for the order-1 relaxation of the unit-circle problem.

    Moment basis is ``[1, x_Im, x_Re]``; the localizing blocks are the
    lower and upper halves of ``x_Re^2 + x_Im^2 = 1``. The multiplier on
    the upper half balances the y20/y02 entries of the moment block.
    """
    a = 1 / math.sqrt(2)
    z0 = a * np.array([[1.0, a, a], [a, 1.0, 0.0], [a, 0.0, 1.0]])
    return [z0, np.array([[0.0]]), np.array([[a]])]


# --------------------------------------------------------------- power flow

def pi_branch_matrix(r, x, bc=0.0, ratio=1.0, shift_deg=0.0):
    """2x2 branch admittance block in the usual transformer-at-origin form."""
    ys = 1.0 / complex(r, x)
    t = ratio * cmath.exp(1j * math.radians(shift_deg))
    ytt = ys + 0.5j * bc
    return np.array([[ytt / (t * t.conjugate()), -ys / t.conjugate()], [-ys / t, ytt]])


def newton_two_bus(ybus, v1, s_load2, tol=1e-13, iters=30):
    """PQ bus 2 fed from slack bus 1 held at ``v1``.

    Unknowns are the rectangular parts of V2; the residual is the complex
    injection mismatch at bus 2 with an analytic Jacobian.
    """
    e, f = 1.0, 0.0
    for _ in range(iters):
        v = np.array([v1, complex(e, f)])
        i2 = ybus[1] @ v
        mismatch = v[1] * np.conj(i2) + s_load2
        if abs(mismatch) < tol:
            break
        # d(V2 conj(I2)) / de and / df with I2 = Y21 V1 + Y22 V2
        y22 = ybus[1, 1]
        d_de = np.conj(i2) + v[1] * np.conj(y22)
        d_df = 1j * np.conj(i2) + v[1] * np.conj(1j * y22)
        jac = np.array([[d_de.real, d_df.real], [d_de.imag, d_df.imag]])
        step = np.linalg.solve(jac, [-mismatch.real, -mismatch.imag])
        e, f = e + step[0], f + step[1]
    else:
        raise RuntimeError("Newton oracle did not converge")
    v = np.array([v1, complex(e, f)])
    return v, v * np.conj(ybus @ v)


TWO_BUS = dict(r=0.01, x=0.08, bc=0.04, ratio=0.98, shift_deg=3.0, gs=0.02, bs=0.15,
               load1=0.2 + 0.05j, load2=0.9 + 0.35j, v1=1.03)


def two_bus_network(p=TWO_BUS, smax=5.0):
    net = Network()
    net.add_bus(1, voltage_element(0.9, 1.1), load_element(p["load1"]),
                generator_element("1_1", 0.0, 3.0, -2.0, 2.0, (0.5, 2.0, 0.1)))
    net.add_bus(2, voltage_element(0.85, 1.15), load_element(p["load2"]), shunt_element(p["gs"], p["bs"]))
    adm = branch_admittance(p["r"], p["x"], p["bc"], p["ratio"], math.radians(p["shift_deg"]))
    net.add_link(1, 2, 1, pi_line_element(adm, smax))
    return net


def two_bus_operating_point(p=TWO_BUS):
    """Voltages and generator output from the Newton oracle."""
    ybus = pi_branch_matrix(p["r"], p["x"], p["bc"], p["ratio"], p["shift_deg"])
    ybus[1, 1] += complex(p["gs"], p["bs"])
    v, s_inj = newton_two_bus(ybus, complex(p["v1"], 0.0), p["load2"] + 0j)
    s_gen = s_inj[0] + p["load1"]
    return v, s_gen


TWO_BUS_M = """function mpc = twobus
mpc.version = '2';
mpc.baseMVA = 100;
%% bus_i type Pd Qd Gs Bs area Vm Va baseKV zone Vmax Vmin
mpc.bus = [
	1	3	20	5	0	0	1	1.03	0	230	1	1.1	0.9;
	2	1	90	35	2	15	1	1	0	230	1	1.15	0.85;
];
%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin
mpc.gen = [
	1	110	40	200	-200	1.03	100	1	300	0;
];
%% fbus tbus r x b rateA rateB rateC ratio angle status angmin angmax
mpc.branch = [
	1	2	0.01	0.08	0.04	500	500	500	0.98	3	1	-360	360;
];
mpc.gencost = [
	2	0	0	3	0.00005	0.02	0.1;
];
"""


# ------------------------------------------------------------- PSCOPF toy

TOY = dict(qmin=-1.0, qmax=-0.41, load=0.8 - 0.5j, v2max=1.07)
TOY_BOX = {
    "V_base_1_Re": (0.95, 1.05),
    "V_c1_1_Re": (0.95, 1.05),
    "V_base_1_Im": (0.0, 0.0),
    "V_c1_1_Im": (0.0, 0.0),
    "bplus_c1_1_1": (0.0, 1.0),
    "bminus_c1_1_1": (0.0, 1.0),
}
TOY_BINARIES = ("bplus_c1_1_1", "bminus_c1_1_1")
# best objective over the four binary assignments, frozen from
# oracles/toy_slsqp.py (multi-start SLSQP per assignment)
TOY_OPTIMUM = 8.73106517440243


def toy_network(p=TOY):
    """Generator bus 1 feeding a capacitive load over two parallel lines."""
    net = Network()
    net.add_bus(1, voltage_element(0.95, 1.05),
                generator_element("1_1", 0.0, 3.0, p["qmin"], p["qmax"], (1.0, 10.0, 0.0)))
    net.add_bus(2, voltage_element(0.9, p["v2max"]), load_element(p["load"]))
    adm = branch_admittance(0.02, 0.1)
    net.add_link(1, 2, 1, pi_line_element(adm))
    net.add_link(1, 2, 2, pi_line_element(adm))
    return net


def toy_pscopf(p=TOY):
    net = toy_network(p)
    return build_pscopf(net, [Contingency("c1", "branch", Link(1, 2, 2))])


def toy_big_ms(pb):
    """Big-M constants recovered from the toy's switching rows."""
    bminus = Variable("bminus_c1_1_1", Kind.BOOL)
    mv = evaluate(pb.constraints["c1/pvpq/1_1/vdrop"].body, Point({bminus: 1})).real
    mq = TOY["qmax"] - pb.constraints["c1/pvpq/1_1/qmax"].lower.real
    return mv, mq


SWITCH_ROWS = ("vdrop", "vrise", "qmax", "qmin", "excl")


def _switching_rows(pb):
    rows = [pb.constraints[f"c1/pvpq/1_1/{r}"] for r in SWITCH_ROWS]
    rows.append(pb.constraints["c1/generator/1/1/qbox"])
    return rows


def _encoded_feasible(rows, pt, tol=1e-9):
    for ctr in rows:
        val = evaluate(ctr.body, pt).real
        if val < ctr.lower.real - tol or val > ctr.upper.real + tol:
            return False
    return True


def _switch_samples():
    mags = np.linspace(0.95, 1.05, 11)
    qs = np.concatenate([np.linspace(TOY["qmin"], TOY["qmax"], 9), [TOY["qmin"] + 1e-3, TOY["qmax"] - 1e-3]])
    return itertools.product(mags, mags, qs)


def _switch_point(a, c, q, bp, bm, phase=0.3):
    return Point({
        Variable("V_base_1", Kind.COMPLEX): a,
        Variable("V_c1_1", Kind.COMPLEX): c * cmath.exp(1j * phase),
        Variable("Sgen_c1_1_1", Kind.COMPLEX): complex(0.8, q),
        Variable("bplus_c1_1_1", Kind.BOOL): bp,
        Variable("bminus_c1_1_1", Kind.BOOL): bm,
    })


def switching_soundness(pb):
    """Encoded-feasible samples that break the voltage/reactive implications.

    Returns ``(checked, offenders)``: with ``D = |V_k|^2 - |V_0|^2``, a
    drop beyond the big-M slack must pin Q at its upper limit and a rise
    must pin it at the lower limit.
    """
    rows = _switching_rows(pb)
    mv, mq = toy_big_ms(pb)
    checked, bad = 0, []
    for a, c, q in _switch_samples():
        for bp, bm in itertools.product((0, 1), repeat=2):
            if not _encoded_feasible(rows, _switch_point(a, c, q, bp, bm)):
                continue
            checked += 1
            d = c * c - a * a
            if d <= -mv * 1e-6 and abs(q - TOY["qmax"]) > 1e-6 * mq:
                bad.append((a, c, q, bp, bm))
            if d >= mv * 1e-6 and abs(q - TOY["qmin"]) > 1e-6 * mq:
                bad.append((a, c, q, bp, bm))
    return checked, bad


def switching_completeness(pb):
    """Implication-feasible samples with no feasible binary assignment."""
    rows = _switching_rows(pb)
    covered, bad = 0, []
    for a, c, q in _switch_samples():
        if not ((c >= a or q == TOY["qmax"]) and (c <= a or q == TOY["qmin"])):
            continue
        covered += 1
        if not any(
            _encoded_feasible(rows, _switch_point(a, c, q, bp, bm))
            for bp, bm in itertools.product((0, 1), repeat=2)
        ):
            bad.append((a, c, q))
    return covered, bad
