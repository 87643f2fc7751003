"""Mixed-integer polynomial problems over complex variables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Union

from .errors import DuplicateName, InvalidName, InvertedBounds, NonRealObjective, UnknownVariable
from .poly import (
    ZERO,
    Kind,
    Point,
    Polynomial,
    Variable,
    as_polynomial,
    check_name,
    evaluate,
    is_real_valued,
)

INF = math.inf


def as_bound(value, lower: bool) -> complex:
    """Coerce a user bound to a complex bound.

    ``None`` means unbounded. A real infinity spreads to both components;
    any other real number gets a zero imaginary part.
    """
    if value is None:
        value = -INF if lower else INF
    if isinstance(value, complex):
        return value
    value = float(value)
    if math.isinf(value):
        return complex(value, value)
    return complex(value, 0.0)


@dataclass(frozen=True)
class Constraint:
    body: Polynomial
    lower: complex = complex(-INF, -INF)
    upper: complex = complex(INF, INF)

    def __post_init__(self):
        lo, up = self.lower, self.upper
        if lo.real > up.real or lo.imag > up.imag:
            raise InvertedBounds(f"lower {lo} exceeds upper {up}")

    @property
    def is_equality(self) -> bool:
        return self.lower == self.upper

    @property
    def real_valued(self) -> bool:
        return is_real_valued(self.body)


@dataclass
class ConstraintValue:
    value: complex
    lower_slack: complex
    upper_slack: complex
    violation: float


@dataclass
class FeasibilityReport:
    objective_value: float
    worst_violation: float
    per_constraint: Dict[str, ConstraintValue]
    integrality_violation: float
    feastol: float

    @property
    def feasible(self) -> bool:
        return self.worst_violation <= self.feastol

    def worst_constraint(self) -> Optional[str]:
        if not self.per_constraint:
            return None
        return max(self.per_constraint, key=lambda k: self.per_constraint[k].violation)


class Problem:
    """Objective, named constraints and the variable registry.

    Builder methods update the problem in place and return it, so calls
    can be chained.
    """

    def __init__(self):
        self.objective: Polynomial = ZERO
        self.constraints: Dict[str, Constraint] = {}
        self.variables: Dict[str, Variable] = {}

    def __repr__(self):
        return (
            f"{type(self).__name__}({len(self.variables)} variables, "
            f"{len(self.constraints)} constraints)"
        )

    def __eq__(self, other):
        if not isinstance(other, Problem):
            return NotImplemented
        return (
            self.objective == other.objective
            and self.constraints == other.constraints
            and self.variables == other.variables
        )

    def register(self, var: Variable) -> Variable:
        known = self.variables.get(var.name)
        if known is None:
            self.variables[var.name] = var
        elif known != var:
            raise DuplicateName(f"variable {var.name} already registered as {known.kind.value}")
        return var

    def _register_poly(self, p: Polynomial):
        for v in sorted(p.variables(), key=lambda v: v.name):
            self.register(v)

    def variable(self, name: str) -> Variable:
        try:
            return self.variables[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}") from None

    def variables_of_kind(self, kind: Kind):
        return [v for _, v in sorted(self.variables.items()) if v.kind is kind]

    def set_objective(self, p) -> "Problem":
        p = as_polynomial(p)
        if not is_real_valued(p):
            raise NonRealObjective("objective must be a real-valued polynomial")
        self._register_poly(p)
        self.objective = p
        return self

    def add_constraint(self, name: str, body, lower=None, upper=None) -> "Problem":
        try:
            check_name(name)
        except InvalidName as exc:
            raise InvalidName(f"constraint name: {exc}") from None
        if name in self.constraints:
            raise DuplicateName(f"constraint {name!r} already defined")
        body = as_polynomial(body)
        ctr = Constraint(body, as_bound(lower, True), as_bound(upper, False))
        self._register_poly(body)
        self.constraints[name] = ctr
        return self

    def add_equality(self, name: str, body, value=0) -> "Problem":
        bound = complex(value)
        return self.add_constraint(name, body, bound, bound)

    def copy(self) -> "Problem":
        new = type(self).__new__(type(self))
        new.__dict__.update(self.__dict__)
        new.constraints = dict(self.constraints)
        new.variables = dict(self.variables)
        return new

    def point_from_names(self, values: Mapping[str, complex]) -> Point:
        return Point({self.variable(name): val for name, val in values.items()})


def new_problem() -> Problem:
    return Problem()


def set_objective(pb: Problem, p) -> Problem:
    return pb.set_objective(p)


def add_constraint(pb: Problem, name: str, body, lower=None, upper=None) -> Problem:
    return pb.add_constraint(name, body, lower, upper)


def component_violation(value: complex, lower: complex, upper: complex, real_valued: bool) -> float:
    """Largest positive exceedance over the finite bound components."""
    worst = 0.0
    pairs = [(value.real, lower.real, upper.real)]
    if not real_valued:
        pairs.append((value.imag, lower.imag, upper.imag))
    for v, lo, up in pairs:
        if lo > -INF:
            worst = max(worst, lo - v)
        if up < INF:
            worst = max(worst, v - up)
    return worst


def integrality_violation(pb: Problem, pt: Point) -> float:
    worst = 0.0
    for var in pb.variables.values():
        if var.kind is Kind.BOOL:
            v = pt.get(var)
            worst = max(worst, abs(v.real - round(v.real)), abs(v.imag))
    return worst


def check_point(pb: Problem, pt: Union[Point, Mapping], feastol: float = 1e-6) -> FeasibilityReport:
    if feastol <= 0:
        raise ValueError("feastol must be positive")
    if not isinstance(pt, Point):
        pt = Point(pt)
    per = {}
    worst = 0.0
    for name, ctr in pb.constraints.items():
        val = evaluate(ctr.body, pt)
        viol = component_violation(val, ctr.lower, ctr.upper, ctr.real_valued)
        per[name] = ConstraintValue(val, val - ctr.lower, ctr.upper - val, viol)
        worst = max(worst, viol)
    integ = integrality_violation(pb, pt)
    return FeasibilityReport(
        objective_value=evaluate(pb.objective, pt).real,
        worst_violation=max(worst, integ),
        per_constraint=per,
        integrality_violation=integ,
        feastol=feastol,
    )
