"""Local solving: a brute-force grid backend and the three-step binary method.

Three steps on a realified mixed-integer problem:

1. solve the continuous relaxation (binaries boxed in ``[0, 1]``);
2. add ``rho * sum b*(1-b)`` to the objective and re-solve, raising ``rho``
   geometrically until every ``b*(1-b) <= comp_tol``;
3. round and fix the binaries, then solve the remaining continuous problem.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Protocol, Sequence, Tuple

import numpy as np

from .errors import (
    AmbiguousRoundingWarning,
    BackendFailure,
    CpopError,
    NoFeasibleGridPoint,
    PenaltyCapExceeded,
)
from .kernels import PolynomialBatch
from .poly import Kind, Point, Polynomial, Variable, derivative, rename, substitute
from .problem import INF, FeasibilityReport, Problem, check_point
from .realify import RealProblem, pb_cplx2real, point_cplx2real, point_real2cplx, real_rows

log = logging.getLogger(__name__)

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration-limit"
BACKEND_FAILURE = "backend-failure"

RELAX_SUFFIX = "_relax"


@dataclass(frozen=True)
class SolveOptions:
    feastol: float = 1e-6
    opttol: float = 1e-3
    penalty_init: float = 1.0
    penalty_growth: float = 10.0
    penalty_cap: float = 1e8
    comp_tol: float = 1e-6

    def __post_init__(self):
        if self.feastol <= 0 or self.opttol <= 0 or self.comp_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.penalty_init <= 0 or self.penalty_cap <= 0:
            raise ValueError("penalty parameters must be positive")
        if self.penalty_growth <= 1:
            raise ValueError("penalty_growth must exceed 1")


@dataclass
class SolveResult:
    point: Point
    status: str
    objective: float
    report: FeasibilityReport

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    def summary(self) -> str:
        lines = [
            f"status {self.status}",
            f"objective {self.objective!r}",
            f"worst_violation {self.report.worst_violation!r}",
        ]
        for var, val in sorted(self.point.items(), key=lambda kv: kv[0].name):
            lines.append(f"{var.name} {val.real!r} {val.imag!r}")
        return "\n".join(lines)


class Backend(Protocol):
    def solve(self, rp: Problem, start: Point, opts: SolveOptions) -> SolveResult: ...


def _result(pb: Problem, pt: Point, opts: SolveOptions) -> SolveResult:
    report = check_point(pb, pt, opts.feastol)
    status = FEASIBLE if report.feasible else INFEASIBLE
    return SolveResult(pt, status, report.objective_value, report)


class _Rows:
    """Objective and scalar constraint rows compiled for batch evaluation."""

    def __init__(self, pb: Problem, variables: Sequence[Variable]):
        self.variables = list(variables)
        rows = []
        for ctr in pb.constraints.values():
            rows.extend(real_rows(ctr))
        self.nrows = len(rows)
        self.lo = np.array([r[1] for r in rows], dtype=float)
        self.hi = np.array([r[2] for r in rows], dtype=float)
        objective = Polynomial({e: c.real for e, c in pb.objective.items()})
        self.values = PolynomialBatch([objective] + [r[0] for r in rows], self.variables)
        self._partials = [
            [(j, derivative(poly, var)) for j, var in enumerate(self.variables)] for poly, _, _ in rows
        ]
        self._jac_cache = {}

    def evaluate(self, X):
        out = self.values.evaluate(X)
        return out[:, 0], out[:, 1:]

    def residual(self, G):
        """Signed distance to the nearest bound; 0 inside."""
        return np.where(G < self.lo, G - self.lo, np.where(G > self.hi, G - self.hi, 0.0))

    def _jacobian_plan(self, cols):
        key = tuple(cols)
        plan = self._jac_cache.get(key)
        if plan is None:
            where = {j: k for k, j in enumerate(cols)}
            rr, cc, polys = [], [], []
            for i, partials in enumerate(self._partials):
                for j, dp in partials:
                    if j in where and not dp.is_zero():
                        rr.append(i)
                        cc.append(where[j])
                        polys.append(dp)
            batch = PolynomialBatch(polys, self.variables) if polys else None
            plan = (np.array(rr, dtype=np.int64), np.array(cc, dtype=np.int64), batch)
            self._jac_cache[key] = plan
        return plan

    def jacobian(self, X, cols):
        """Partials of the rows with respect to the variables in ``cols``."""
        rr, cc, batch = self._jacobian_plan(cols)
        J = np.zeros((X.shape[0], self.nrows, len(cols)))
        if batch is not None:
            J[:, rr, cc] = batch.evaluate(X)
        return J


def _min_norm_step(J, r, damping=1e-12):
    """Batched ``J^+ r`` via damped normal equations on the smaller side."""
    m, n = J.shape[1], J.shape[2]
    Jt = np.swapaxes(J, 1, 2)
    if m <= n:
        A = J @ Jt
        lam = damping * np.maximum(1.0, np.trace(A, axis1=1, axis2=2))
        A += lam[:, None, None] * np.eye(m)
        return np.einsum("pij,pj->pi", Jt, np.linalg.solve(A, r[..., None])[..., 0])
    A = Jt @ J
    lam = damping * np.maximum(1.0, np.trace(A, axis1=1, axis2=2))
    A += lam[:, None, None] * np.eye(n)
    return np.linalg.solve(A, np.einsum("pji,pj->pi", J, r)[..., None])[..., 0]


def _gauss_newton(rows: _Rows, X, cols, iters=40, tol=1e-13, patience=4):
    """Min-norm Newton steps on the violated rows, moving only ``cols``.

    A point is dropped once it converges, or once its worst residual has
    failed to halve for ``patience`` consecutive steps.
    """
    X = X.copy()
    if not cols or rows.nrows == 0:
        return X
    active = np.arange(X.shape[0])
    best = np.full(X.shape[0], np.inf)
    stalls = np.zeros(X.shape[0], dtype=int)
    for _ in range(iters):
        _, G = rows.evaluate(X[active])
        r = rows.residual(G)
        worst = np.max(np.abs(r), axis=1)
        improved = worst < 0.5 * best[active]
        stalls[active] = np.where(improved, 0, stalls[active] + 1)
        best[active] = np.minimum(best[active], worst)
        todo = (worst > tol) & (stalls[active] < patience) & np.isfinite(worst)
        active = active[todo]
        if active.size == 0:
            break
        r = r[todo]
        J = rows.jacobian(X[active], cols)
        J[r == 0] = 0.0
        step = -_min_norm_step(J, r)
        norm = np.linalg.norm(step, axis=1, keepdims=True)
        step *= np.minimum(1.0, 1.0 / np.maximum(norm, 1e-300))
        X[np.ix_(active, cols)] += step
    return X


def _axis_count(grid: int, nsearch: int, max_points: int) -> int:
    if nsearch == 0:
        return 1
    per_axis = grid
    while per_axis > 2 and per_axis**nsearch > max_points:
        per_axis -= 1
    return per_axis


def brute_force_solve(
    rp: Problem,
    box: Mapping[str, Tuple[float, float]],
    grid: int = 201,
    refine_rounds: int = 3,
    opts: SolveOptions = SolveOptions(),
    start: Optional[Point] = None,
    max_points: int = 250_000,
    chunk: int = 4096,
) -> SolveResult:
    """Grid search with shrinking boxes, then a Newton polish.

    Variables with a nondegenerate interval in ``box`` are search axes (at
    most 4); a degenerate interval ``(a, a)`` fixes a variable; every other
    variable is dependent and is completed at each grid point by min-norm
    Newton steps on the violated rows, starting from ``start``.

    Each grid point is then corrected by min-norm Newton steps over all
    free variables; it is kept when the corrected point violates no row by
    more than ``10*feastol`` and has not left its grid cell. Each
    refinement round re-grids a box 4 times narrower around the best kept
    point.
    """
    names = sorted(rp.variables)
    variables = [rp.variables[n] for n in names]
    for v in variables:
        if v.kind is not Kind.REAL:
            raise CpopError(f"brute force needs continuous REAL variables; {v.name} is {v.kind.value}")
    box = {n: (float(lo), float(hi)) for n, (lo, hi) in box.items() if n in rp.variables}
    for n, (lo, hi) in box.items():
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise CpopError(f"bad box for {n}: [{lo}, {hi}]")
    search = [i for i, n in enumerate(names) if n in box and box[n][0] < box[n][1]]
    fixed = [i for i, n in enumerate(names) if n in box and box[n][0] == box[n][1]]
    dependent = [i for i in range(len(names)) if names[i] not in box]
    if len(search) > 4:
        raise CpopError(f"brute force searches at most 4 variables, got {len(search)}")

    rows = _Rows(rp, variables)
    x0 = np.zeros(len(names))
    if start is not None:
        by_name = start.by_name()
        for i, n in enumerate(names):
            x0[i] = by_name.get(n, 0j).real
    for i in fixed:
        x0[i] = box[names[i]][0]

    per_axis = _axis_count(grid, len(search), max_points)
    lo0 = np.array([box[names[i]][0] for i in search])
    hi0 = np.array([box[names[i]][1] for i in search])
    lo, hi = lo0.copy(), hi0.copy()
    best, best_f = None, np.inf
    screen = 10 * opts.feastol
    for rnd in range(refine_rounds + 1):
        axes = [np.linspace(lo[k], hi[k], per_axis) for k in range(len(search))]
        h = (hi - lo) / max(per_axis - 1, 1)
        base = x0 if best is None else best
        npts = per_axis ** len(search)
        round_best, round_f, kept = None, np.inf, 0
        for first in range(0, npts, chunk):
            idx = np.arange(first, min(first + chunk, npts))
            X = np.tile(base, (idx.size, 1))
            if search:
                coords = np.unravel_index(idx, (per_axis,) * len(search))
                for k, i in enumerate(search):
                    X[:, i] = axes[k][coords[k]]
            X = _gauss_newton(rows, X, dependent)
            if search:
                anchor = X[:, search].copy()
                X = _gauss_newton(rows, X, search + dependent)
                inside = np.all(np.abs(X[:, search] - anchor) <= 0.5 * h + 1e-12, axis=1)
            else:
                inside = True
            f, G = rows.evaluate(X)
            viol = np.abs(rows.residual(G))
            ok = (
                inside
                & np.all(viol <= screen, axis=1)
                & np.all(np.isfinite(X), axis=1)
                & np.isfinite(f)
            )
            if ok.any():
                kept += int(ok.sum())
                j = np.flatnonzero(ok)[np.argmin(f[ok])]
                if f[j] < round_f:
                    round_f, round_best = f[j], X[j].copy()
        if round_best is not None and round_f <= best_f:
            best, best_f = round_best, round_f
        elif best is None:
            raise NoFeasibleGridPoint("no grid point passes the feasibility screen")
        log.debug("round %d: %d/%d points kept, best objective %g", rnd, kept, npts, round_f)
        if search:
            center = best[search]
            half = (hi - lo) / 8
            lo = np.maximum(lo0, center - half)
            hi = np.minimum(hi0, center + half)

    polished = _gauss_newton(rows, best[None, :], search + dependent, iters=60)[0]
    if not np.all(np.isfinite(polished)):
        polished = best
    pt = Point({v: polished[i] for i, v in enumerate(variables)})
    return _result(rp, pt, opts)


class BruteForceBackend:
    """:class:`Backend` over :func:`brute_force_solve`.

    ``box`` entries for variables absent from a given problem are ignored,
    so one backend serves all three steps.
    """

    def __init__(self, box: Mapping[str, Tuple[float, float]], grid: int = 201, refine_rounds: int = 3, max_points: int = 250_000):
        self.box = dict(box)
        self.grid = grid
        self.refine_rounds = refine_rounds
        self.max_points = max_points

    def solve(self, rp, start, opts):
        return brute_force_solve(rp, self.box, self.grid, self.refine_rounds, opts, start, self.max_points)


def relax_binaries(pb: Problem) -> Problem:
    """BOOL variables become REAL with a ``0 <= b <= 1`` row named ``<b>_relax``."""
    bools = pb.variables_of_kind(Kind.BOOL)
    if not bools:
        return pb
    swap = {b: Variable(b.name, Kind.REAL) for b in bools}
    out = pb.copy()
    out.variables = {n: swap.get(v, v) for n, v in pb.variables.items()}
    out.objective = rename(pb.objective, swap)
    out.constraints = {}
    for name, ctr in pb.constraints.items():
        out.add_constraint(name, rename(ctr.body, swap), ctr.lower, ctr.upper)
    for b in bools:
        out.add_constraint(b.name + RELAX_SUFFIX, swap[b], 0.0, 1.0)
    return out


def relaxed_binaries(pb: Problem) -> List[str]:
    """Names of REAL variables carrying a relaxation box row."""
    return [
        n for n, v in sorted(pb.variables.items())
        if v.kind is Kind.REAL and n + RELAX_SUFFIX in pb.constraints
    ]


def complementarity_reformulate(rp: Problem, rho: float) -> Problem:
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    out = rp.copy()
    penalty = Polynomial()
    for n in relaxed_binaries(rp):
        b = rp.variables[n]
        penalty = penalty + b * (1 - b)
    if rho and not penalty.is_zero():
        out.objective = rp.objective + rho * penalty
    return out


def _binary_names(pb: Problem) -> List[str]:
    return sorted(set(v.name for v in pb.variables_of_kind(Kind.BOOL)) | set(relaxed_binaries(pb)))


def round_binaries(pt: Point, names: Sequence[str]) -> Dict[str, float]:
    values = pt.by_name()
    out = {}
    for n in names:
        v = values.get(n, 0j).real
        if abs(v - 0.5) < 1e-9:
            warnings.warn(f"{n} = {v} is ambiguous; fixed to 0", AmbiguousRoundingWarning, stacklevel=3)
            out[n] = 0.0
        else:
            out[n] = float(round(v))
    return out


def fix_binaries(rp: Problem, pt: Point) -> Problem:
    """Replace every (former) BOOL variable by its rounded value."""
    names = _binary_names(rp)
    if not names:
        return rp
    fixed = round_binaries(pt, names)
    values = {rp.variables[n]: v for n, v in fixed.items()}
    out = rp.copy()
    out.variables = {n: v for n, v in rp.variables.items() if n not in fixed}
    out.objective = substitute(rp.objective, values)
    out.constraints = {}
    for name, ctr in rp.constraints.items():
        if name.endswith(RELAX_SUFFIX) and name[: -len(RELAX_SUFFIX)] in fixed:
            continue
        out.add_constraint(name, substitute(ctr.body, values), ctr.lower, ctr.upper)
    return out


def flat_start(rp: RealProblem, voltage_prefix: str = "V_") -> Point:
    """Voltages at 1+0i, everything else at 0."""
    values = {}
    for src, (re, im) in rp.mapping.items():
        if src.startswith(voltage_prefix) and re in rp.variables:
            values[rp.variables[re]] = 1.0
    return Point(values)


def _call(backend: Backend, pb: Problem, start: Point, opts: SolveOptions, step: int) -> SolveResult:
    try:
        res = backend.solve(pb, start, opts)
    except (CpopError, np.linalg.LinAlgError) as exc:
        raise BackendFailure(str(exc), step=step) from exc
    if res.status == BACKEND_FAILURE:
        raise BackendFailure("backend reported failure", step=step)
    return res


def complementarity_gap(pt: Point, names: Sequence[str]) -> float:
    values = pt.by_name()
    return max((abs(values.get(n, 0j).real * (1 - values.get(n, 0j).real)) for n in names), default=0.0)


def three_step_solve(
    pb: Problem,
    backend: Backend,
    opts: SolveOptions = SolveOptions(),
    start: Optional[Point] = None,
) -> SolveResult:
    """Relax, penalize, fix. The returned point lives in ``pb``'s variables."""
    rp = pb if isinstance(pb, RealProblem) else pb_cplx2real(pb)
    names = [v.name for v in rp.variables_of_kind(Kind.BOOL)]
    relaxed = relax_binaries(rp)
    if start is None:
        x = flat_start(rp)
    elif isinstance(pb, RealProblem):
        x = start
    else:
        x = point_cplx2real(start, rp.mapping)

    res = _call(backend, relaxed, x, opts, step=1)
    point = res.point
    if names and res.feasible:
        rho = opts.penalty_init
        gaps = []
        while complementarity_gap(point, names) > opts.comp_tol:
            if rho > opts.penalty_cap:
                raise PenaltyCapExceeded(
                    f"b*(1-b) = {complementarity_gap(point, names):g} > {opts.comp_tol:g} at penalty cap {opts.penalty_cap:g}"
                )
            res = _call(backend, complementarity_reformulate(relaxed, rho), point, opts, step=2)
            point = res.point
            gaps.append(complementarity_gap(point, names))
            rho *= opts.penalty_growth
        log.info("complementarity gaps per penalty round: %s", gaps)

        fixed = fix_binaries(rp, point)
        binvals = round_binaries(point, names)
        free = Point({v: val for v, val in point.items() if v.name not in binvals})
        res = _call(backend, fixed, free, opts, step=3)
        point = res.point.merged(Point({rp.variables[n]: v for n, v in binvals.items()}))
    else:
        point = Point({rp.variables.get(v.name, v): val for v, val in point.items()})

    if isinstance(pb, RealProblem):
        return _result(pb, point, opts)
    return _result(pb, point_real2cplx(point, rp.mapping), opts)
