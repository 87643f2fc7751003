"""Polynomial optimization in complex variables, with power-system builders.

Typical flow::

    from cpop import Variable, Kind, Problem, abs2, pb_cplx2real
    x = Variable("x", Kind.COMPLEX)
    pb = Problem().set_objective(...).add_equality("unit", abs2(x), 1)
    rp = pb_cplx2real(pb)
"""

from .builders import (
    Contingency,
    PscopfOptions,
    apply_contingency,
    build_acopf,
    build_pscopf,
    uniform_participation,
)
from .errors import *  # noqa: F401,F403
from .formats import read_cpop, write_cpop, write_sdpa
from .kernels import BACKEND as KERNEL_BACKEND
from .kernels import PolynomialBatch
from .matpower import (
    case_to_network,
    parse_contingencies,
    parse_matpower,
    read_contingencies,
    read_matpower,
)
from .network import (
    Link,
    Network,
    assemble,
    branch_admittance,
    generator_element,
    load_element,
    pi_line_element,
    shunt_element,
    voltage_element,
)
from .poly import (
    Exponent,
    Kind,
    Point,
    Polynomial,
    Variable,
    abs2,
    add,
    cleanup,
    conj,
    conjugate,
    derivative,
    evaluate,
    imag_part,
    is_real_valued,
    make_variable,
    mul,
    real_part,
    substitute,
    total_degree,
)
from .problem import (
    Constraint,
    FeasibilityReport,
    Problem,
    add_constraint,
    check_point,
    new_problem,
    set_objective,
)
from .realify import RealProblem, pb_cplx2real, point_cplx2real, point_real2cplx, poly_cplx2real
from .relaxation import MomentRelaxation, build_moment_relaxation, moment_basis
from .solve import (
    Backend,
    BruteForceBackend,
    SolveOptions,
    SolveResult,
    brute_force_solve,
    complementarity_reformulate,
    fix_binaries,
    flat_start,
    relax_binaries,
    three_step_solve,
)

__version__ = "0.1.0"
