import math

import pytest

from cpop.errors import DuplicateName, InvertedBounds, NonRealObjective, UnknownVariable
from cpop.poly import Kind, Point, Variable, abs2, conj
from cpop.problem import (
    INF,
    Problem,
    add_constraint,
    as_bound,
    check_point,
    new_problem,
    set_objective,
)

x = Variable("x", Kind.COMPLEX)
b = Variable("b", Kind.BOOL)

OBJ_P = 0.5 * (x + conj(x) - 1j * (x - conj(x)))


def problem_p():
    return new_problem().set_objective(OBJ_P).add_equality("unit", abs2(x), 1)


def test_new_problem_is_empty():
    pb = new_problem()
    assert pb.variables == {} and pb.constraints == {}
    assert pb.objective.is_zero()


def test_objective_must_be_real_valued():
    pb = new_problem()
    set_objective(pb, OBJ_P)
    set_objective(pb, abs2(x))
    with pytest.raises(NonRealObjective):
        set_objective(pb, x)


def test_equality_and_duplicate_names():
    pb = new_problem()
    add_constraint(pb, "unit", abs2(x), 1, 1)
    ctr = pb.constraints["unit"]
    assert ctr.is_equality and ctr.lower == 1 and ctr.body == abs2(x)
    with pytest.raises(DuplicateName):
        add_constraint(pb, "unit", abs2(x), 1, 1)


def test_componentwise_box():
    pb = new_problem().add_constraint("box", x, -1 - 1j, 1 + 1j)
    assert check_point(pb, Point({x: 0.5 - 0.9j}), 1e-9).feasible
    rep = check_point(pb, Point({x: 0.5 + 1.5j}), 1e-9)
    assert rep.worst_violation == pytest.approx(0.5)


def test_bound_coercion():
    assert as_bound(None, True) == complex(-INF, -INF)
    assert as_bound(math.inf, False) == complex(INF, INF)
    assert as_bound(2.0, True) == 2 + 0j
    with pytest.raises(InvertedBounds):
        new_problem().add_constraint("bad", x, 2, 1)


def test_registry_kind_conflict():
    pb = new_problem().add_constraint("a", x, None, 1)
    with pytest.raises(DuplicateName):
        pb.register(Variable("x", Kind.REAL))
    with pytest.raises(UnknownVariable):
        pb.variable("nope")


def test_check_point_at_optimum_and_origin():
    pb = problem_p()
    s = -math.sqrt(2) / 2
    rep = check_point(pb, Point({x: complex(s, s)}))
    assert rep.worst_violation <= 1e-9
    assert rep.objective_value == pytest.approx(-math.sqrt(2), abs=1e-12)
    rep0 = check_point(pb, Point({x: 0}))
    assert rep0.worst_violation == pytest.approx(1.0)
    assert rep0.worst_constraint() == "unit"
    assert not rep0.feasible


def test_integrality_violation():
    pb = new_problem().set_objective(b)
    rep = check_point(pb, Point({b: 0.4}))
    assert rep.integrality_violation == pytest.approx(0.4)
    assert not rep.feasible


def test_imaginary_bounds_ignored_for_real_bodies():
    pb = new_problem().add_constraint("u", abs2(x), 1 + 5j, 1 + 6j)
    assert check_point(pb, Point({x: 1})).feasible


def test_copy_is_independent():
    pb = problem_p()
    cp = pb.copy()
    cp.add_constraint("extra", x, None, 3)
    assert "extra" not in pb.constraints
    assert cp != pb and problem_p() == pb
