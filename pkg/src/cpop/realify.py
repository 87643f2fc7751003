"""Rectangular conversion of complex problems: ``z = z_Re + i*z_Im``."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Dict, Mapping, Tuple

from .errors import NameCollision, UnknownVariable
from .poly import (
    ONE,
    Exponent,
    Kind,
    Point,
    Polynomial,
    Variable,
    as_polynomial,
    is_real_valued,
)
from .problem import INF, Problem

RE_SUFFIX = "_Re"
IM_SUFFIX = "_Im"


def real_names(name: str) -> Tuple[str, str]:
    return name + RE_SUFFIX, name + IM_SUFFIX


class RealProblem(Problem):
    """A problem over REAL and BOOL variables only.

    ``mapping`` sends each complex source variable name to the names of
    its real and imaginary parts.
    """

    def __init__(self, mapping: Mapping[str, Tuple[str, str]] = None):
        super().__init__()
        self.mapping: Dict[str, Tuple[str, str]] = dict(mapping or {})

    def copy(self) -> "RealProblem":
        new = super().copy()
        new.mapping = dict(self.mapping)
        return new


@lru_cache(maxsize=None)
def _binomial_expansion(expl: int, cj: int):
    """Coefficients of (a + ib)^expl (a - ib)^cj as {(pow_a, pow_b): gaussian int}."""
    acc = {}
    for i in range(expl + 1):
        ci = math.comb(expl, i) * (1j) ** (expl - i)
        for j in range(cj + 1):
            cjj = math.comb(cj, j) * (-1j) ** (cj - j)
            key = (i + j, expl + cj - i - j)
            acc[key] = acc.get(key, 0) + ci * cjj
    return tuple((k, complex(round(v.real), round(v.imag))) for k, v in acc.items() if v != 0)


def _real_vars(var: Variable):
    re, im = real_names(var.name)
    return Variable(re, Kind.REAL), Variable(im, Kind.REAL)


def _expand(p: Polynomial) -> Dict[Exponent, complex]:
    acc = {}
    for expo, coef in p.items():
        partial = {ONE: coef}
        for var, expl, cj in expo.factors:
            if var.is_complex:
                vre, vim = _real_vars(var)
                pieces = [
                    (Exponent({vre: (pa, 0), vim: (pb, 0)}), k)
                    for (pa, pb), k in _binomial_expansion(expl, cj)
                ]
            else:
                pieces = [(Exponent({var: (expl, 0)}), 1)]
            nxt = {}
            for e1, c1 in partial.items():
                for e2, c2 in pieces:
                    e = e1 * e2
                    nxt[e] = nxt.get(e, 0j) + c1 * c2
            partial = nxt
        for e, c in partial.items():
            acc[e] = acc.get(e, 0j) + c
    return acc


def poly_cplx2real(p) -> Tuple[Polynomial, Polynomial]:
    """Split ``p`` into real polynomials ``(p_re, p_im)`` in the real parts.

    A real-valued ``p`` has ``p_im`` identically zero; that case is
    returned exactly instead of relying on floating-point cancellation.
    """
    p = as_polynomial(p)
    acc = _expand(p)
    p_re = Polynomial._from_dict({e: complex(c.real, 0.0) for e, c in acc.items()})
    if is_real_valued(p):
        return p_re, Polynomial()
    p_im = Polynomial._from_dict({e: complex(c.imag, 0.0) for e, c in acc.items()})
    return p_re, p_im


def _binary_row_name(var: Variable) -> str:
    return f"{var.name}_binary"


def binary_square(var: Variable) -> Polynomial:
    return var * (1 - var)


def pb_cplx2real(pb: Problem, with_binary_squares: bool = False) -> RealProblem:
    mapping = {}
    taken = set(pb.variables)
    for name, var in sorted(pb.variables.items()):
        if var.is_complex:
            re, im = real_names(name)
            for n in (re, im):
                if n in taken:
                    raise NameCollision(f"realified name {n} collides with an existing variable")
                taken.add(n)
            mapping[name] = (re, im)

    rp = RealProblem(mapping)
    for name, var in sorted(pb.variables.items()):
        if var.is_complex:
            for v in _real_vars(var):
                rp.register(v)
        else:
            rp.register(var)

    obj_re, _ = poly_cplx2real(pb.objective)
    rp.set_objective(obj_re)

    for name, ctr in pb.constraints.items():
        body_re, body_im = poly_cplx2real(ctr.body)
        if body_im.is_zero():
            rp.add_constraint(name, body_re, ctr.lower.real, ctr.upper.real)
        else:
            rp.add_constraint(name + RE_SUFFIX, body_re, ctr.lower.real, ctr.upper.real)
            rp.add_constraint(name + IM_SUFFIX, body_im, ctr.lower.imag, ctr.upper.imag)

    if with_binary_squares:
        for var in pb.variables_of_kind(Kind.BOOL):
            rp.add_constraint(_binary_row_name(var), binary_square(var), 0.0, 0.0)
    return rp


def point_cplx2real(pt: Point, mapping: Mapping[str, Tuple[str, str]]) -> Point:
    values = {}
    for var, val in pt.items():
        if var.is_complex:
            if var.name not in mapping:
                raise UnknownVariable(f"{var.name} is not in the realification mapping")
            re, im = real_names(var.name)
            values[Variable(re, Kind.REAL)] = val.real
            values[Variable(im, Kind.REAL)] = val.imag
        else:
            values[var] = val
    return Point(values)


def point_real2cplx(pt: Point, mapping: Mapping[str, Tuple[str, str]]) -> Point:
    by_name = {v.name: (v, val) for v, val in pt.items()}
    used = set()
    values = {}
    for src, (re, im) in mapping.items():
        if re in by_name or im in by_name:
            a = by_name.get(re, (None, 0j))[1].real
            b = by_name.get(im, (None, 0j))[1].real
            values[Variable(src, Kind.COMPLEX)] = complex(a, b)
            used.update((re, im))
    for name, (var, val) in by_name.items():
        if name in used:
            continue
        if var.is_complex:
            raise UnknownVariable(f"{name} is complex and outside the mapping")
        values[var] = val
    return Point(values)


def real_rows(ctr) -> list:
    """Scalar rows ``(poly, lo, hi)`` equivalent to a constraint with real variables."""
    body_re, body_im = poly_cplx2real(ctr.body)
    rows = [(body_re, ctr.lower.real, ctr.upper.real)]
    if not body_im.is_zero():
        rows.append((body_im, ctr.lower.imag, ctr.upper.imag))
    return [r for r in rows if r[1] > -INF or r[2] < INF]
