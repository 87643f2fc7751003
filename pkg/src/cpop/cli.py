"""Command-line entry point: ``cpop <subcommand> ...``.

Paths may be ``-`` for standard input. Output goes to standard output
unless ``-o`` is given.
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

from .builders import PscopfOptions, build_acopf, build_pscopf
from .errors import CpopError, ParseError, UnknownVariable
from .formats import format_number, read_cpop, write_cpop, write_sdpa
from .matpower import case_to_network, parse_contingencies, parse_matpower
from .poly import Point, evaluate
from .problem import Problem, check_point
from .realify import pb_cplx2real
from .relaxation import build_moment_relaxation
from .solve import BruteForceBackend, SolveOptions, three_step_solve

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, path: Optional[str], stdout: TextIO):
    if path is None or path == "-":
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def parse_point(text: str, pb: Problem) -> Point:
    """Lines ``name re im``; blank lines and ``#`` comments are skipped."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if len(tok) != 3:
            raise ParseError("expected 'name re im'", lineno)
        name = tok[0]
        if name not in pb.variables:
            raise UnknownVariable(f"line {lineno}: unknown variable {name!r}")
        try:
            values[pb.variables[name]] = complex(float(tok[1]), float(tok[2]))
        except ValueError:
            raise ParseError(f"bad number in {line!r}", lineno) from None
    try:
        return Point(values)
    except ValueError as exc:
        raise CpopError(str(exc)) from None


def write_point(pt: Point) -> str:
    lines = []
    for var, val in sorted(pt.items(), key=lambda kv: kv[0].name):
        lines.append(f"{var.name} {format_number(val.real)} {format_number(val.imag)}")
    return "".join(line + "\n" for line in lines)


def _parse_box(items: Sequence[str]) -> Dict[str, Tuple[float, float]]:
    box = {}
    for item in items:
        name, sep, rng = item.partition("=")
        lo, sep2, hi = rng.partition(":")
        if not sep or not sep2 or not name:
            raise CpopError(f"--box expects name=lo:hi, got {item!r}")
        try:
            box[name] = (float(lo), float(hi))
        except ValueError:
            raise CpopError(f"--box expects numbers in {item!r}") from None
    return box


def _load_problem(path: str) -> Problem:
    return read_cpop(_read_text(path))


def _cmd_convert(args, out):
    _emit(write_cpop(pb_cplx2real(_load_problem(args.input))), args.output, out)
    return EXIT_OK


def _cmd_build_acopf(args, out):
    net = case_to_network(parse_matpower(_read_text(args.case)))
    _emit(write_cpop(build_acopf(net)), args.output, out)
    return EXIT_OK


def _cmd_build_pscopf(args, out):
    net = case_to_network(parse_matpower(_read_text(args.case)))
    contingencies, participation = parse_contingencies(_read_text(args.contingencies), net)
    opts = PscopfOptions(big_m_v=args.big_m_v, big_m_q=args.big_m_q)
    _emit(write_cpop(build_pscopf(net, contingencies, participation, opts)), args.output, out)
    return EXIT_OK


def _report_lines(report) -> List[str]:
    worst = report.worst_constraint()
    return [
        f"feasible {'yes' if report.feasible else 'no'}",
        f"objective {report.objective_value!r}",
        f"worst_violation {report.worst_violation!r}",
        f"worst_constraint {worst if worst is not None else '-'}",
        f"integrality_violation {report.integrality_violation!r}",
    ]


def _cmd_check(args, out):
    pb = _load_problem(args.input)
    pt = parse_point(_read_text(args.point), pb)
    report = check_point(pb, pt, args.feastol)
    _emit("".join(line + "\n" for line in _report_lines(report)), args.output, out)
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def _cmd_eval(args, out):
    pb = _load_problem(args.input)
    pt = parse_point(_read_text(args.point), pb)
    report = check_point(pb, pt, args.feastol)
    lines = [f"objective {format_number(evaluate(pb.objective, pt).real)}"]
    for name in sorted(report.per_constraint):
        cv = report.per_constraint[name]
        lines.append(
            f"{name} {format_number(cv.value.real)} {format_number(cv.value.imag)} {format_number(cv.violation)}"
        )
    _emit("".join(line + "\n" for line in lines), args.output, out)
    return EXIT_OK


def _cmd_relax(args, out):
    if args.order < 1:
        raise CpopError("--order must be at least 1")
    rp = pb_cplx2real(_load_problem(args.input), with_binary_squares=True)
    _emit(write_sdpa(build_moment_relaxation(rp, args.order)), args.output, out)
    return EXIT_OK


def _options(args) -> SolveOptions:
    return SolveOptions(feastol=args.feastol, opttol=args.opttol)


def _cmd_solve(args, out):
    pb = _load_problem(args.input)
    backend = BruteForceBackend(_parse_box(args.box), grid=args.grid, refine_rounds=args.rounds)
    start = parse_point(_read_text(args.start), pb) if args.start else None
    result = three_step_solve(pb, backend, _options(args), start)
    _emit(result.summary() + "\n", args.output, out)
    return EXIT_OK if result.feasible else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpop", description="Complex polynomial optimization toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("-o", "--output", default=None, help="output file (default: stdout)")
        return p

    p = add("convert", _cmd_convert, "realify a .cpop problem")
    p.add_argument("input")

    p = add("build-acopf", _cmd_build_acopf, "MATPOWER case -> ACOPF .cpop")
    p.add_argument("case")

    p = add("build-pscopf", _cmd_build_pscopf, "MATPOWER case + contingency JSON -> PSCOPF .cpop")
    p.add_argument("case")
    p.add_argument("contingencies")
    p.add_argument("--big-m-v", type=float, default=None)
    p.add_argument("--big-m-q", type=float, default=None)

    for name, func, text in (
        ("check", _cmd_check, "feasibility report of a point"),
        ("eval", _cmd_eval, "objective and constraint values at a point"),
    ):
        p = add(name, func, text)
        p.add_argument("input")
        p.add_argument("point")
        p.add_argument("--feastol", type=float, default=1e-6)

    p = add("relax", _cmd_relax, "moment relaxation as sparse SDPA")
    p.add_argument("input")
    p.add_argument("--order", type=int, required=True)

    p = add("solve", _cmd_solve, "three-step solve with the brute-force backend")
    p.add_argument("input")
    p.add_argument("--box", action="append", default=[], metavar="NAME=LO:HI",
                   help="search interval of a real variable (repeatable; LO=HI fixes it)")
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--rounds", type=int, default=3)
    p.add_argument("--start", default=None, help="point file used as the initial guess")
    p.add_argument("--feastol", type=float, default=1e-6)
    p.add_argument("--opttol", type=float, default=1e-3)
    return parser


def run(argv: Optional[Sequence[str]] = None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args, stdout)
    except (CpopError, OSError, ValueError, RuntimeError) as exc:
        stderr.write(f"cpop {args.command}: {exc}\n")
        return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
