"""Dense order-d moment relaxation of a real polynomial problem."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import CpopError, OrderTooSmall
from .poly import Kind, Polynomial, Variable, total_degree
from .problem import INF, Problem
from .realify import real_rows

Monomial = Tuple[int, ...]


def moment_basis(variables: Sequence, d: int) -> List[Monomial]:
    """Exponent tuples of total degree <= d, graded then lexicographic.

    ``variables`` only fixes the count and the column order.
    """
    if d < 0:
        raise ValueError("degree must be nonnegative")
    n = len(variables)
    out = []
    for deg in range(d + 1):
        for combo in combinations_with_replacement(range(n), deg):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def _add(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


@dataclass
class Block:
    """Affine symmetric matrix ``constant + sum_k y_k * coeffs[k]`` (k >= 1)."""

    label: str
    size: int
    constant: np.ndarray
    coeffs: Dict[int, np.ndarray] = field(default_factory=dict)

    def nonzero_matrices(self):
        if np.any(self.constant):
            yield 0, self.constant
        for k in sorted(self.coeffs):
            if np.any(self.coeffs[k]):
                yield k, self.coeffs[k]

    def evaluate(self, y: np.ndarray) -> np.ndarray:
        """Matrix at moment vector ``y`` (``y[0]`` is ignored; it is fixed to 1)."""
        out = self.constant.copy()
        for k, mat in self.coeffs.items():
            out += y[k] * mat
        return out


@dataclass
class MomentRelaxation:
    order: int
    variables: List[str]
    moments: List[Monomial]
    objective: np.ndarray  # over moments[1:]
    objective_offset: float
    blocks: List[Block]

    @property
    def num_moments(self) -> int:
        return len(self.moments) - 1

    def moment_vector(self, values: Dict[str, float]) -> np.ndarray:
        """Rank-one moments ``y_a = x^a`` of a point, ``y[0] = 1``."""
        x = np.array([values.get(v, 0.0) for v in self.variables], dtype=float)
        return np.array([np.prod(x ** np.array(a)) for a in self.moments])

    def objective_value(self, y: np.ndarray) -> float:
        return float(self.objective @ y[1:] + self.objective_offset)


def _as_monomial_poly(p: Polynomial, index: Dict[Variable, int], n: int) -> Dict[Monomial, float]:
    out = {}
    for expo, coef in p.items():
        e = [0] * n
        for v, ex, cj in expo.factors:
            e[index[v]] += ex + cj
        out[tuple(e)] = out.get(tuple(e), 0.0) + coef.real
    return out


def _has_binary_square(pb: Problem, var: Variable) -> bool:
    target = var * (1 - var)
    return any(
        c.is_equality and c.lower == 0 and c.body == target for c in pb.constraints.values()
    )


def inequality_rows(pb: Problem) -> List[Tuple[str, Polynomial]]:
    """Each finite bound as ``g >= 0``: ``body - lb`` and ``ub - body``."""
    rows = []
    for name in sorted(pb.constraints):
        ctr = pb.constraints[name]
        parts = real_rows(ctr)
        for k, (body, lo, hi) in enumerate(parts):
            suffix = "" if len(parts) == 1 else ("/re", "/im")[k]
            if lo > -INF:
                rows.append((f"{name}{suffix}/lb", body - lo))
            if hi < INF:
                rows.append((f"{name}{suffix}/ub", hi - body))
    return rows


def build_moment_relaxation(rp: Problem, d: int) -> MomentRelaxation:
    if d < 1:
        raise OrderTooSmall("relaxation order must be at least 1")
    variables = [rp.variables[n] for n in sorted(rp.variables)]
    for v in variables:
        if v.kind is Kind.COMPLEX:
            raise CpopError(f"complex variable {v.name}: realify the problem first")
        if v.kind is Kind.BOOL and not _has_binary_square(rp, v):
            raise CpopError(f"BOOL variable {v.name} has no b*(1-b)=0 row")
    n = len(variables)
    index = {v: i for i, v in enumerate(variables)}

    moments = moment_basis(variables, 2 * d)
    pos = {a: k for k, a in enumerate(moments)}

    obj_deg = total_degree(rp.objective)
    if obj_deg > 2 * d:
        raise OrderTooSmall(f"objective degree {obj_deg} exceeds 2d = {2 * d}")
    objective = np.zeros(len(moments))
    for a, c in _as_monomial_poly(rp.objective, index, n).items():
        objective[pos[a]] += c

    def block(label, weights: Dict[Monomial, float], dg: int) -> Block:
        basis = moment_basis(variables, dg)
        size = len(basis)
        const = np.zeros((size, size))
        coeffs: Dict[int, np.ndarray] = {}
        for i, u in enumerate(basis):
            for j in range(i, size):
                uv = _add(u, basis[j])
                for gamma, w in weights.items():
                    k = pos[_add(uv, gamma)]
                    if k == 0:
                        target = const
                    else:
                        target = coeffs.setdefault(k, np.zeros((size, size)))
                    target[i, j] += w
                    if i != j:
                        target[j, i] += w
        return Block(label, size, const, coeffs)

    blocks = [block("moment", {(0,) * n: 1.0}, d)]
    for label, g in inequality_rows(rp):
        dg = d - math.ceil(total_degree(g) / 2)
        if dg < 0:
            raise OrderTooSmall(f"constraint {label} has degree {total_degree(g)} > 2d = {2 * d}")
        blocks.append(block(label, _as_monomial_poly(g, index, n), dg))

    return MomentRelaxation(
        order=d,
        variables=[v.name for v in variables],
        moments=moments,
        objective=objective[1:],
        objective_offset=float(objective[0]),
        blocks=blocks,
    )
