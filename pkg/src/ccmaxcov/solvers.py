"""Baseline bit-flip heuristics maximizing penalized coverage.

All solvers start from the all-zeros solution (always feasible, fitness 0),
count that first evaluation against the budget, and report the best solution
seen. The random decisions of a run are drawn up front from one numpy
Generator and handed to the evaluation kernel in ``_kernels``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from ._accel import USE_NUMBA
from .graph import Graph
from .instance import StochasticInstance
from .seeding import mix

ALGORITHMS = ("EA", "RLS", "GHC", "FGA", "SA")


class SolverConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    algorithm: str
    eval_budget: int = 10_000
    seed: int = 0
    fga_beta: float = 1.5
    sa_t0: float | None = None          # None: n / 10
    sa_cooling: float | None = None     # None: reach 1e-3 * t0 at budget exhaustion

    def __post_init__(self):
        algo = self.algorithm.upper()
        if algo not in ALGORITHMS:
            raise SolverConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        object.__setattr__(self, "algorithm", algo)
        if self.eval_budget < 1:
            raise SolverConfigError("eval_budget must be >= 1")
        if not self.fga_beta > 1:
            raise SolverConfigError("fga_beta must be > 1")
        if self.sa_t0 is not None and not self.sa_t0 > 0:
            raise SolverConfigError("sa_t0 must be > 0")
        if self.sa_cooling is not None and not 0 < self.sa_cooling < 1:
            raise SolverConfigError("sa_cooling must lie in (0, 1)")


@dataclass
class SolverRunResult:
    algorithm: str
    seed: int
    best_fitness: float
    best_solution: np.ndarray
    evals_used: int
    trace: np.ndarray | None = field(default=None, repr=False)

    @property
    def trajectory(self) -> list[tuple[int, float]]:
        """``(eval_index, best_so_far)`` at the first evaluation and every improvement."""
        if self.trace is None:
            return []
        t = self.trace
        idx = np.flatnonzero(np.concatenate([[True], t[1:] > t[:-1]]))
        return [(int(i) + 1, float(t[i])) for i in idx]


def power_law_flips(n: int, beta: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Sample mutation strengths r in 1..max(1, n//2) with P(r) proportional to r**-beta."""
    top = max(1, n // 2)
    cdf = np.cumsum(np.arange(1, top + 1, dtype=np.float64) ** -beta)
    cdf /= cdf[-1]
    r = np.searchsorted(cdf, rng.random(size), side="right") + 1
    return np.minimum(r, top)


def power_law_pmf(n: int, beta: float) -> np.ndarray:
    w = np.arange(1, max(1, n // 2) + 1, dtype=np.float64) ** -beta
    return w / w.sum()


def sa_schedule(n: int, eval_budget: int, t0: float | None = None,
                cooling: float | None = None) -> tuple[float, float]:
    t0 = n / 10.0 if t0 is None else t0
    cooling = 1e-3 ** (1.0 / eval_budget) if cooling is None else cooling
    return t0, cooling


_EMPTY_F = np.empty(0, dtype=np.float64)
_EMPTY_I = np.empty(0, dtype=np.int64)


def _draw_streams(cfg: SolverConfig, n: int, rng: np.random.Generator):
    """Pre-draw all randomness of one run: (counts, uniforms, scan, accept_u, temps)."""
    steps = cfg.eval_budget - 1
    algo = cfg.algorithm
    if algo == "GHC" or steps == 0:
        return _EMPTY_I, _EMPTY_F, algo == "GHC", _EMPTY_F, _EMPTY_F
    if algo == "EA":
        counts = rng.binomial(n, 1.0 / n, size=steps)
    elif algo == "FGA":
        r = power_law_flips(n, cfg.fga_beta, steps, rng)
        counts = rng.binomial(n, r / n)
    else:
        counts = np.ones(steps, dtype=np.int64)
    counts = counts.astype(np.int64)
    uniforms = rng.random(int(counts.sum()))
    if algo == "SA":
        t0, cool = sa_schedule(n, cfg.eval_budget, cfg.sa_t0, cfg.sa_cooling)
        temps = t0 * cool ** np.arange(1, steps + 1, dtype=np.float64)
        accept_u = rng.random(steps)
        return counts, uniforms, False, accept_u, temps
    return counts, uniforms, False, _EMPTY_F, _EMPTY_F


def run_solver(cfg: SolverConfig, inst: StochasticInstance, g: Graph,
               *, keep_trace: bool = False, use_numba: bool | None = None) -> SolverRunResult:
    """One seeded run of ``cfg.algorithm`` for exactly ``cfg.eval_budget`` evaluations."""
    if g.n != inst.n:
        raise ValueError(f"graph has {g.n} nodes, instance has {inst.n}")
    use_numba = USE_NUMBA if use_numba is None else use_numba
    rng = np.random.default_rng(cfg.seed)
    counts, uniforms, scan, accept_u, temps = _draw_streams(cfg, g.n, rng)
    trace = np.empty(cfg.eval_budget, dtype=np.float64)
    if use_numba:
        best_f, best_x = _kernels.solve_nb(
            g.indptr, g.indices, inst.mu, inst.sigma2, inst.budget, inst.alpha,
            counts, uniforms, scan, accept_u, temps, trace)
    else:
        best_f, best_x = _kernels.solve_np(
            g.closed_neighborhood_matrix(), inst.mu, inst.sigma2, inst.budget, inst.alpha,
            counts, uniforms, scan, accept_u, temps, trace)
    return SolverRunResult(
        algorithm=cfg.algorithm, seed=cfg.seed, best_fitness=float(best_f),
        best_solution=np.asarray(best_x, dtype=np.uint8), evals_used=cfg.eval_budget,
        trace=trace if keep_trace else None,
    )


def run_seed(base_seed: int, algorithm: str, run: int) -> int:
    """Seed of run ``run`` in a batch: ``mix(base_seed, algorithm, run)``."""
    return mix(base_seed, algorithm.upper(), run)


def run_batch(cfg: SolverConfig, inst: StochasticInstance, g: Graph, runs: int,
              base_seed: int, *, workers: int = 1, keep_trace: bool = False,
              use_numba: bool | None = None) -> list[SolverRunResult]:
    """``runs`` independent runs; results are ordered by run index regardless of ``workers``."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    cfgs = [replace(cfg, seed=run_seed(base_seed, cfg.algorithm, i)) for i in range(runs)]

    def one(c):
        return run_solver(c, inst, g, keep_trace=keep_trace, use_numba=use_numba)

    if workers <= 1 or runs == 1:
        return [one(c) for c in cfgs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, cfgs))


def best_fitnesses(results) -> np.ndarray:
    return np.array([r.best_fitness for r in results], dtype=np.float64)


__all__ = ["ALGORITHMS", "SolverConfig", "SolverConfigError", "SolverRunResult",
           "run_solver", "run_batch", "run_seed", "power_law_flips", "power_law_pmf",
           "sa_schedule", "best_fitnesses"]
