"""Compare the compiled and numpy batch-evaluation kernels.

Evaluates every scalar row of a realified ACOPF problem at random points,
which is the inner loop of the brute-force solver.

    python3 benchmarks/bench_kernels.py --case 14 --points 20000
"""

import argparse
import timeit
from importlib import resources

import numpy as np

from cpop.builders import build_acopf
from cpop.kernels import BACKEND, PolynomialBatch
from cpop.matpower import case_to_network, parse_matpower
from cpop.realify import pb_cplx2real, real_rows


def load_rows(case: int):
    text = resources.files("cpop").joinpath(f"data/case{case}.m").read_text()
    rp = pb_cplx2real(build_acopf(case_to_network(parse_matpower(text))))
    polys = [rp.objective]
    for ctr in rp.constraints.values():
        polys.extend(body for body, _, _ in real_rows(ctr))
    variables = [rp.variables[n] for n in sorted(rp.variables)]
    return polys, variables


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--case", type=int, choices=(9, 14), default=14)
    parser.add_argument("--points", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    polys, variables = load_rows(args.case)
    rng = np.random.default_rng(0)
    X = rng.uniform(-1.1, 1.1, size=(args.points, len(variables)))
    print(f"case{args.case}: {len(polys)} rows, {len(variables)} variables, {args.points} points")

    backends = ["numpy"] + (["compiled"] if BACKEND == "compiled" else [])
    timings, results = {}, {}
    for name in backends:
        batch = PolynomialBatch(polys, variables, backend=name)
        results[name] = batch.evaluate(X)
        timings[name] = min(timeit.repeat(lambda: batch.evaluate(X), number=1, repeat=args.repeat))
        print(f"{name:>9}: {timings[name] * 1e3:9.2f} ms")
    if "compiled" in timings:
        gap = np.max(np.abs(results["compiled"] - results["numpy"]))
        print(f"  speedup: {timings['numpy'] / timings['compiled']:.1f}x  (max abs difference {gap:.2e})")
    else:
        print("compiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
