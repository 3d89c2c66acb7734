"""Time the compiled solver kernel against the pure-numpy fallback.

Both backends consume the same pre-drawn random streams, so besides timing we
check that they return the same best value and solution.

    python3 benchmarks/bench_kernels.py --n 100 300 --budget 2000 --runs 5
"""

import argparse
import time

import numpy as np

from ccmaxcov import _accel
from ccmaxcov.graph import gen_random_graph
from ccmaxcov.instance import init_random
from ccmaxcov.solvers import ALGORITHMS, SolverConfig, run_solver


def time_runs(cfg_list, inst, g, use_numba):
    t0 = time.perf_counter()
    out = [run_solver(c, inst, g, use_numba=use_numba) for c in cfg_list]
    return time.perf_counter() - t0, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[100, 300])
    ap.add_argument("--p", type=float, default=None, help="edge probability (default 4/n)")
    ap.add_argument("--budget", type=int, default=2000)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--algos", nargs="+", default=list(ALGORITHMS))
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare against")

    print(f"{'n':>5} {'algo':>4} {'numba s':>9} {'numpy s':>9} {'speedup':>8}  match")
    for n in args.n:
        g = gen_random_graph(n, args.p if args.p is not None else 4.0 / n, args.seed)
        inst = init_random(g, 1000.0, 0.05, args.seed)
        for algo in args.algos:
            cfgs = [SolverConfig(algo, args.budget, args.seed + r) for r in range(args.runs)]
            run_solver(cfgs[0], inst, g, use_numba=True)  # compile outside the timing
            t_nb, a = time_runs(cfgs, inst, g, True)
            t_np, b = time_runs(cfgs, inst, g, False)
            same = all(x.best_fitness == y.best_fitness
                       and np.array_equal(x.best_solution, y.best_solution) for x, y in zip(a, b))
            print(f"{n:>5} {algo:>4} {t_nb:9.4f} {t_np:9.4f} {t_np / t_nb:8.1f}  {same}")


if __name__ == "__main__":
    main()
