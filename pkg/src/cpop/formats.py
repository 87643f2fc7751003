"""CPOP v1 text format and sparse SDPA export.

CPOP v1 lines, single-space separated::

    VAR <name> <COMPLEX|REAL|BOOL>
    OBJ MONO <term> <re> <im>
    CTR <name> MONO <term> <re> <im>
    CTR <name> LB|UB|EQ <re> <im>
    # comment

A term is ``1`` or ``*``-joined factors ``x``, ``x^k``, ``conj(x)``,
``conj(x)^k``. The writer emits variables, then the objective, then each
constraint in name order; numbers use the shortest round-trip decimal.
"""

from __future__ import annotations

import math
import re
from typing import Dict, List

from .errors import DuplicateBound, ParseError, UndeclaredVariable
from .poly import Exponent, Kind, Polynomial, Variable
from .problem import INF, Problem


def format_number(x: float) -> str:
    if math.isnan(x):
        raise ValueError("NaN cannot be serialized")
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _pair(c: complex) -> str:
    return f"{format_number(c.real)} {format_number(c.imag)}"


def write_cpop(pb: Problem) -> str:
    lines = []
    for name in sorted(pb.variables):
        lines.append(f"VAR {name} {pb.variables[name].kind.value}")
    for expo, coef in pb.objective.items():
        lines.append(f"OBJ MONO {expo.term_string()} {_pair(coef)}")
    for name in sorted(pb.constraints):
        ctr = pb.constraints[name]
        for expo, coef in ctr.body.items():
            lines.append(f"CTR {name} MONO {expo.term_string()} {_pair(coef)}")
        if ctr.is_equality:
            lines.append(f"CTR {name} EQ {_pair(ctr.lower)}")
        else:
            lines.append(f"CTR {name} LB {_pair(ctr.lower)}")
            lines.append(f"CTR {name} UB {_pair(ctr.upper)}")
    return "".join(line + "\n" for line in lines)


_FACTOR = re.compile(r"^(conj\()?([^*^()\s]+)(\))?(?:\^(\d+))?$")


def _parse_number(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"bad number {tok!r}", lineno) from None


def _parse_term(term: str, variables: Dict[str, Variable], lineno: int) -> Exponent:
    if term == "1":
        return Exponent()
    factors = []
    for piece in term.split("*"):
        m = _FACTOR.match(piece)
        if not m or bool(m.group(1)) != bool(m.group(3)):
            raise ParseError(f"bad factor {piece!r}", lineno)
        name = m.group(2)
        if name not in variables:
            raise UndeclaredVariable(f"variable {name!r} used before its VAR line", lineno)
        power = int(m.group(4)) if m.group(4) else 1
        if power < 1:
            raise ParseError(f"bad power in {piece!r}", lineno)
        factors.append((variables[name], (0, power) if m.group(1) else (power, 0)))
    return Exponent(factors)


def read_cpop(text: str, problem_cls=Problem) -> Problem:
    variables: Dict[str, Variable] = {}
    objective: List = []
    bodies: Dict[str, List] = {}
    bounds: Dict[str, Dict[str, complex]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tok = line.split()
        head = tok[0]
        if head == "VAR":
            if len(tok) != 3:
                raise ParseError("VAR needs a name and a kind", lineno)
            if tok[1] in variables:
                raise ParseError(f"variable {tok[1]} declared twice", lineno)
            try:
                kind = Kind(tok[2])
            except ValueError:
                raise ParseError(f"unknown kind {tok[2]!r}", lineno) from None
            variables[tok[1]] = Variable(tok[1], kind)
        elif head == "OBJ":
            if len(tok) != 5 or tok[1] != "MONO":
                raise ParseError("expected 'OBJ MONO <term> <re> <im>'", lineno)
            expo = _parse_term(tok[2], variables, lineno)
            objective.append((expo, complex(_parse_number(tok[3], lineno), _parse_number(tok[4], lineno))))
        elif head == "CTR":
            if len(tok) < 3:
                raise ParseError("truncated CTR line", lineno)
            name, what = tok[1], tok[2]
            bodies.setdefault(name, [])
            bounds.setdefault(name, {})
            if what == "MONO":
                if len(tok) != 6:
                    raise ParseError("expected 'CTR <name> MONO <term> <re> <im>'", lineno)
                expo = _parse_term(tok[3], variables, lineno)
                bodies[name].append((expo, complex(_parse_number(tok[4], lineno), _parse_number(tok[5], lineno))))
            elif what in ("LB", "UB", "EQ"):
                if len(tok) != 5:
                    raise ParseError(f"expected 'CTR <name> {what} <re> <im>'", lineno)
                seen = bounds[name]
                if what in seen or (what == "EQ" and seen) or "EQ" in seen:
                    raise DuplicateBound(f"constraint {name} has more than one {what} bound", lineno)
                seen[what] = complex(_parse_number(tok[3], lineno), _parse_number(tok[4], lineno))
            else:
                raise ParseError(f"unknown CTR directive {what!r}", lineno)
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)

    pb = problem_cls()
    for name in variables:
        pb.register(variables[name])
    pb.set_objective(Polynomial(objective))
    for name, terms in bodies.items():
        b = bounds[name]
        if "EQ" in b:
            lo = hi = b["EQ"]
        else:
            lo = b.get("LB", complex(-INF, -INF))
            hi = b.get("UB", complex(INF, INF))
        pb.add_constraint(name, Polynomial(terms), lo, hi)
    return pb


def write_sdpa(rel) -> str:
    """Sparse SDPA text for a :class:`~cpop.relaxation.MomentRelaxation`.

    SDPA reads ``sum_i F_i y_i - F_0 >= 0``, so the constant matrix of
    each block is written negated as ``F_0``.
    """
    m = rel.num_moments
    lines = [str(m), str(len(rel.blocks))]
    lines.append(" ".join(str(b.size) for b in rel.blocks))
    lines.append(" ".join(format_number(float(c)) for c in rel.objective))
    entries = []
    for blk, block in enumerate(rel.blocks, start=1):
        for mat, matrix in block.nonzero_matrices():
            sign = -1.0 if mat == 0 else 1.0
            n = matrix.shape[0]
            for i in range(n):
                for j in range(i, n):
                    val = matrix[i, j]
                    if val != 0:
                        entries.append((mat, blk, i + 1, j + 1, sign * float(val)))
    entries.sort(key=lambda e: e[:4])
    for mat, blk, i, j, val in entries:
        lines.append(f"{mat} {blk} {i} {j} {format_number(val)}")
    return "".join(line + "\n" for line in lines)
