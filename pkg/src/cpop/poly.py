"""Sparse multivariate polynomials in complex variables and their conjugates.

A :class:`Polynomial` is a finite map from :class:`Exponent` (a product
``z^a * conj(z)^b`` over variables) to complex coefficients. Values are
immutable; every operation returns a new polynomial.

>>> x = Variable("x", Kind.COMPLEX)
>>> p = (1 + 4j) * x**2 + 3 * x * conj(x)
>>> total_degree(p)
2
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Union

from .errors import InvalidName

_RESERVED = set("*^()")


class Kind(enum.Enum):
    COMPLEX = "COMPLEX"
    REAL = "REAL"
    BOOL = "BOOL"


@dataclass(frozen=True)
class Variable:
    name: str
    kind: Kind = Kind.COMPLEX

    def __post_init__(self):
        if not isinstance(self.kind, Kind):
            object.__setattr__(self, "kind", Kind(self.kind))
        check_name(self.name)

    @property
    def is_complex(self) -> bool:
        return self.kind is Kind.COMPLEX

    def __repr__(self):
        return f"Variable({self.name!r}, {self.kind.value})"

    # arithmetic goes through Polynomial
    def _poly(self):
        return Polynomial.from_variable(self)

    def __add__(self, other):
        return self._poly() + other

    __radd__ = __add__

    def __sub__(self, other):
        return self._poly() - other

    def __rsub__(self, other):
        return other - self._poly()

    def __mul__(self, other):
        return self._poly() * other

    def __rmul__(self, other):
        return other * self._poly()

    def __truediv__(self, other):
        return self._poly() / other

    def __neg__(self):
        return -self._poly()

    def __pow__(self, k):
        return self._poly() ** k


def check_name(name: str) -> None:
    """Reject names the text format cannot carry."""
    if not isinstance(name, str) or not name:
        raise InvalidName("name must be a nonempty string")
    if any(c.isspace() or c in _RESERVED for c in name):
        raise InvalidName(f"reserved character in name {name!r}")


def make_variable(name: str, kind: Union[Kind, str] = Kind.COMPLEX) -> Variable:
    return Variable(name, Kind(kind))


class Exponent:
    """Product of variable powers ``prod v^expl * conj(v)^conj``.

    Conjugate powers of REAL and BOOL variables are folded into the plain
    power, so ``conj`` is always 0 for those kinds.
    """

    __slots__ = ("_factors", "_hash")

    def __init__(self, factors: Mapping[Variable, tuple] = ()):
        items = factors.items() if isinstance(factors, Mapping) else factors
        merged = {}
        for var, (expl, cj) in items:
            if expl < 0 or cj < 0:
                raise ValueError("exponents must be nonnegative")
            if not var.is_complex:
                expl, cj = expl + cj, 0
            e0, c0 = merged.get(var, (0, 0))
            merged[var] = (e0 + expl, c0 + cj)
        self._factors = tuple(
            (v, e, c)
            for v, (e, c) in sorted(merged.items(), key=lambda kv: (kv[0].name, kv[0].kind.value))
            if e or c
        )
        self._hash = hash(self._factors)

    @classmethod
    def _raw(cls, factors):
        obj = cls.__new__(cls)
        obj._factors = factors
        obj._hash = hash(factors)
        return obj

    @property
    def factors(self):
        """Tuple of ``(variable, expl, conj)`` in canonical order."""
        return self._factors

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return isinstance(other, Exponent) and self._factors == other._factors

    def __len__(self):
        return len(self._factors)

    def is_constant(self) -> bool:
        return not self._factors

    def degree(self) -> int:
        return sum(e + c for _, e, c in self._factors)

    def variables(self):
        return [v for v, _, _ in self._factors]

    def sort_key(self):
        key = []
        for v, e, c in self._factors:
            if e:
                key.append((v.name, 0, e))
            if c:
                key.append((v.name, 1, c))
        return tuple(key)

    def __mul__(self, other: "Exponent") -> "Exponent":
        if not self._factors:
            return other
        if not other._factors:
            return self
        merged = {v: (e, c) for v, e, c in self._factors}
        for v, e, c in other._factors:
            e0, c0 = merged.get(v, (0, 0))
            merged[v] = (e0 + e, c0 + c)
        return Exponent._raw(
            tuple((v, e, c) for v, (e, c) in sorted(merged.items(), key=lambda kv: (kv[0].name, kv[0].kind.value)))
        )

    def conjugate(self) -> "Exponent":
        if all(c == 0 and not v.is_complex for v, _, c in self._factors):
            return self
        return Exponent._raw(
            tuple((v, c, e) if v.is_complex else (v, e, c) for v, e, c in self._factors)
        )

    def term_string(self) -> str:
        """Text-format rendering, e.g. ``x^2*conj(y)^3``; ``1`` for the constant."""
        parts = []
        for v, e, c in self._factors:
            if e:
                parts.append(v.name if e == 1 else f"{v.name}^{e}")
            if c:
                parts.append(f"conj({v.name})" if c == 1 else f"conj({v.name})^{c}")
        return "*".join(parts) if parts else "1"

    def __repr__(self):
        return f"Exponent({self.term_string()})"


ONE = Exponent()

Number = Union[int, float, complex]


class Polynomial:
    """Immutable sparse polynomial; iteration order is canonical."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Union[Mapping[Exponent, Number], Iterable] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc = {}
        for expo, coef in items:
            acc[expo] = acc.get(expo, 0j) + complex(coef)
        self._terms = _canonical(acc)

    @classmethod
    def _from_dict(cls, acc):
        obj = cls.__new__(cls)
        obj._terms = _canonical(acc)
        return obj

    @classmethod
    def constant(cls, c: Number) -> "Polynomial":
        return cls._from_dict({ONE: complex(c)})

    @classmethod
    def from_variable(cls, v: Variable, conj: bool = False) -> "Polynomial":
        expo = Exponent({v: (0, 1) if conj else (1, 0)})
        return cls._from_dict({expo: 1 + 0j})

    @property
    def terms(self) -> Mapping[Exponent, complex]:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(e.is_constant() for e in self._terms)

    def constant_term(self) -> complex:
        return self._terms.get(ONE, 0j)

    def variables(self) -> set:
        out = set()
        for expo in self._terms:
            out.update(expo.variables())
        return out

    def __eq__(self, other):
        if isinstance(other, (Variable, int, float, complex)):
            other = as_polynomial(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "Polynomial(0)"
        body = " + ".join(f"({_fmt(c)})*{e.term_string()}" for e, c in self._terms.items())
        return f"Polynomial({body})"

    # arithmetic
    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._from_dict({e: -c for e, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return add(self, -other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return add(other, -self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex)):
            return Polynomial._from_dict({e: c / other for e, c in self._terms.items()})
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = Polynomial.constant(1)
        base = self
        while k:
            if k & 1:
                result = mul(result, base)
            k >>= 1
            if k:
                base = mul(base, base)
        return result

    def conj(self) -> "Polynomial":
        return conjugate(self)


def _canonical(acc):
    return {e: acc[e] for e in sorted(acc, key=Exponent.sort_key) if acc[e] != 0}


def _fmt(c: complex) -> str:
    return f"{c.real:g}{c.imag:+g}i"


def _coerce(obj):
    if isinstance(obj, Polynomial):
        return obj
    if isinstance(obj, Variable):
        return Polynomial.from_variable(obj)
    if isinstance(obj, (int, float, complex)):
        return Polynomial.constant(obj)
    return None


def as_polynomial(obj) -> Polynomial:
    p = _coerce(obj)
    if p is None:
        raise TypeError(f"cannot convert {type(obj).__name__} to Polynomial")
    return p


ZERO = Polynomial()


def add(p: Polynomial, q: Polynomial) -> Polynomial:
    acc = dict(p._terms)
    for e, c in q._terms.items():
        acc[e] = acc.get(e, 0j) + c
    return Polynomial._from_dict(acc)


def mul(p: Polynomial, q: Polynomial) -> Polynomial:
    acc = {}
    for e1, c1 in p._terms.items():
        for e2, c2 in q._terms.items():
            e = e1 * e2
            acc[e] = acc.get(e, 0j) + c1 * c2
    return Polynomial._from_dict(acc)


def conjugate(p) -> Polynomial:
    p = as_polynomial(p)
    return Polynomial._from_dict({e.conjugate(): c.conjugate() for e, c in p._terms.items()})


conj = conjugate


def abs2(p) -> Polynomial:
    """Squared modulus ``p * conj(p)``.

    The product is symmetrized so mirrored coefficients are exact
    conjugates regardless of floating-point summation order.
    """
    p = as_polynomial(p)
    prod = mul(p, conjugate(p))._terms
    acc = {}
    for e, c in prod.items():
        m = e.conjugate()
        if m == e:
            acc[e] = complex(c.real, 0.0)
        elif e.sort_key() < m.sort_key():
            acc[e] = c
            acc[m] = c.conjugate()
    return Polynomial._from_dict(acc)


def real_part(p) -> Polynomial:
    """``(p + conj(p)) / 2``, a real-valued polynomial."""
    p = as_polynomial(p)
    return (p + conjugate(p)) * 0.5


def imag_part(p) -> Polynomial:
    """``(p - conj(p)) / 2i``, a real-valued polynomial."""
    p = as_polynomial(p)
    return (p - conjugate(p)) * -0.5j


def is_real_valued(p) -> bool:
    p = as_polynomial(p)
    terms = p._terms
    for e, c in terms.items():
        if terms.get(e.conjugate(), 0j) != c.conjugate():
            return False
    return True


def total_degree(p) -> int:
    p = as_polynomial(p)
    return max((e.degree() for e in p._terms), default=0)


def cleanup(p: Polynomial, tol: float) -> Polynomial:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    return Polynomial._from_dict({e: c for e, c in p._terms.items() if abs(c) > tol})


def _value_of(pt, var):
    if isinstance(pt, Point):
        return pt.get(var)
    return complex(pt.get(var, 0))


def evaluate(p, pt) -> complex:
    """Evaluate at a :class:`Point` (or a mapping Variable -> value)."""
    p = as_polynomial(p)
    total = 0j
    for e, c in p._terms.items():
        term = c
        for v, ex, cj in e.factors:
            val = _value_of(pt, v)
            if ex:
                term *= val**ex
            if cj:
                term *= val.conjugate() ** cj
        total += term
    return total


def substitute(p: Polynomial, values: Mapping[Variable, Number]) -> Polynomial:
    """Replace the given variables by constants and collect."""
    acc = {}
    for e, c in p._terms.items():
        keep = []
        for v, ex, cj in e.factors:
            if v in values:
                val = complex(values[v])
                c = c * val**ex * val.conjugate() ** cj
            else:
                keep.append((v, ex, cj))
        expo = Exponent._raw(tuple(keep)) if len(keep) != len(e.factors) else e
        acc[expo] = acc.get(expo, 0j) + c
    return Polynomial._from_dict(acc)


def rename(p: Polynomial, mapping: Mapping[Variable, Variable]) -> Polynomial:
    """Swap variables one-for-one (kinds may change, e.g. BOOL -> REAL)."""
    acc = {}
    for e, c in p._terms.items():
        expo = Exponent([(mapping.get(v, v), (ex, cj)) for v, ex, cj in e.factors])
        acc[expo] = acc.get(expo, 0j) + c
    return Polynomial._from_dict(acc)


def derivative(p: Polynomial, var: Variable) -> Polynomial:
    """Partial derivative with respect to a REAL or BOOL variable."""
    if var.is_complex:
        raise ValueError("derivative is defined for real variables only")
    acc = {}
    for e, c in p._terms.items():
        new = []
        power = 0
        for v, ex, cj in e.factors:
            if v == var:
                power = ex
                if ex > 1:
                    new.append((v, ex - 1, cj))
            else:
                new.append((v, ex, cj))
        if power:
            expo = Exponent._raw(tuple(new))
            acc[expo] = acc.get(expo, 0j) + c * power
    return Polynomial._from_dict(acc)


class Point:
    """Assignment of complex values to variables; absent variables read as 0."""

    __slots__ = ("_values",)

    def __init__(self, assignment: Union[Mapping[Variable, Number], Iterable] = ()):
        items = assignment.items() if isinstance(assignment, Mapping) else assignment
        values = {}
        for var, val in items:
            val = complex(val)
            if not var.is_complex and val.imag != 0:
                raise ValueError(f"{var.kind.value} variable {var.name} given complex value {val}")
            if math.isnan(val.real) or math.isnan(val.imag):
                raise ValueError(f"NaN value for {var.name}")
            values[var] = val
        self._values = values

    @classmethod
    def from_lists(cls, variables, values):
        return cls(zip(variables, values))

    def get(self, var: Variable) -> complex:
        return self._values.get(var, 0j)

    def __getitem__(self, var):
        return self._values[var]

    def __contains__(self, var):
        return var in self._values

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def items(self):
        return self._values.items()

    def by_name(self) -> dict:
        return {v.name: val for v, val in self._values.items()}

    def merged(self, other: "Point") -> "Point":
        return Point({**self._values, **other._values})

    def __eq__(self, other):
        return isinstance(other, Point) and self._values == other._values

    def __repr__(self):
        inner = ", ".join(f"{v.name}: {val}" for v, val in sorted(self._values.items(), key=lambda kv: kv[0].name))
        return f"Point({{{inner}}})"
