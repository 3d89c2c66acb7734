"""(1+1) EA over instance cost parameters.

Each generation perturbs the per-node cost means and variances with Gaussian
noise, rescales the budget, scores the offspring by how much better the easy
solver does than the hard one, and keeps it if it scores at least as well as
the parent. Both mutation scales follow a 1/5 success rule.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .graph import Graph
from .instance import StochasticInstance, init_random, write_instance
from .ratio import EPSILON, RatioStats, discounted_fitness, k_for_confidence, paired_ratios
from .seeding import mix
from .solvers import SolverConfig, best_fitnesses, run_batch

log = logging.getLogger(__name__)

FITNESS_KINDS = ("ratio", "discounted")
STEP_FACTOR = 1.5
SIGMA_FLOOR = 1e-3

# (sigma1, sigma2) for the weak, medium and strong mutation settings
SIGMA_SETTINGS = ((10.0, 33.0), (15.0, 75.0), (20.0, 133.0))


@dataclass(frozen=True)
class EvolverConfig:
    easy_algo: str = "EA"
    hard_algo: str = "FGA"
    fitness_kind: str = "ratio"
    confidence: float = 0.99
    k_alpha: float | None = None        # overrides confidence when set
    inner_runs: int = 10
    inner_budget: int = 10_000
    outer_budget: int = 10_000
    p_m: float = 1.0
    sigma1: float = 10.0
    sigma2: float = 33.0
    mu_max: float = 1000.0
    alpha: float = 0.05
    epsilon: float = EPSILON
    seed: int = 0
    reevaluate_parent: bool = False
    fga_beta: float = 1.5
    sa_t0: float | None = None
    sa_cooling: float | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "easy_algo", self.easy_algo.upper())
        object.__setattr__(self, "hard_algo", self.hard_algo.upper())
        if self.fitness_kind not in FITNESS_KINDS:
            raise ValueError(f"fitness_kind must be one of {FITNESS_KINDS}")
        if not 0 < self.p_m <= 1:
            raise ValueError("p_m must lie in (0, 1]")
        if not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ValueError("mutation scales must be positive")
        if min(self.inner_runs, self.inner_budget, self.outer_budget) < 1:
            raise ValueError("budgets and run counts must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        # fail early on bad solver tags/parameters
        self.solver_config(self.easy_algo)
        self.solver_config(self.hard_algo)

    @property
    def k(self) -> float:
        """Discount multiplier; 0 for the plain ratio fitness."""
        if self.fitness_kind == "ratio":
            return 0.0
        if self.k_alpha is not None:
            return self.k_alpha
        return k_for_confidence(self.confidence)

    def solver_config(self, algo: str) -> SolverConfig:
        return SolverConfig(algo, self.inner_budget, 0, self.fga_beta, self.sa_t0, self.sa_cooling)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class EvolutionLogEntry:
    generation: int
    fitness: float          # offspring score (generation 0: the initial instance)
    best_fitness: float     # stored parent score after selection
    mean_ratio: float
    std_ratio: float
    sigma1: float
    sigma2: float
    budget_B: float
    accepted: bool
    success: bool


LOG_COLUMNS = [f.name for f in fields(EvolutionLogEntry)]


@dataclass
class EvolutionResult:
    instance: StochasticInstance
    fitness: float
    stats: RatioStats
    log: list[EvolutionLogEntry] = field(repr=False)
    initial_fitness: float = float("nan")


def apply_cost_mutation(mu, sigma2, a, b, mask, mu_max):
    """Shift costs by ``a``/``b`` where ``mask`` holds, clamping to the model's ranges.

    Variances are clamped against the post-mutation mean, so ``sigma2 <= mu**2/3``
    always holds afterwards.
    """
    mu = np.asarray(mu, dtype=np.float64)
    sigma2 = np.asarray(sigma2, dtype=np.float64)
    new_mu = np.where(mask, np.clip(mu + a, 0.0, mu_max), mu)
    new_s2 = np.where(mask, np.clip(sigma2 + b, 0.0, new_mu ** 2 / 3.0), sigma2)
    return new_mu, new_s2


def mutate_instance(parent: StochasticInstance, sigma1: float, sigma2: float,
                    p_m: float, seed: int) -> StochasticInstance:
    """Gaussian perturbation of each node's cost parameters with probability ``p_m``."""
    rng = np.random.default_rng(seed)
    n = parent.n
    mask = rng.random(n) < p_m
    a = rng.normal(0.0, sigma1, n)
    b = rng.normal(0.0, sigma2, n)
    mu, s2 = apply_cost_mutation(parent.mu, parent.sigma2, a, b, mask, parent.mu_max)
    return parent.with_costs(mu, s2)


def adapt_sigma(sigma: float, success: bool, factor: float = STEP_FACTOR,
                lo: float = SIGMA_FLOOR, hi: float = float("inf")) -> float:
    """1/5 rule: grow by ``factor`` on success, shrink by ``factor**-1/4`` otherwise."""
    s = sigma * factor if success else sigma * factor ** -0.25
    return float(min(max(s, lo), hi))


def evaluate_instance(inst: StochasticInstance, g: Graph, cfg: EvolverConfig,
                      generation: int = 0, stream: str = "eval") -> tuple[float, RatioStats]:
    """Score an instance by the (discounted) mean easy/hard ratio over paired runs."""
    base = mix(cfg.seed, stream, generation)
    easy = run_batch(cfg.solver_config(cfg.easy_algo), inst, g, cfg.inner_runs, base,
                     workers=cfg.workers)
    hard = run_batch(cfg.solver_config(cfg.hard_algo), inst, g, cfg.inner_runs, base,
                     workers=cfg.workers)
    ratios = paired_ratios(best_fitnesses(easy), best_fitnesses(hard), cfg.epsilon)
    stats = discounted_fitness(ratios, k=cfg.k, epsilon=cfg.epsilon)
    return stats.discounted, stats


def evolve(g: Graph, cfg: EvolverConfig, out_dir=None, graph_ref=None,
           graph_format: str | None = None, index_base: int = 0,
           progress_every: int = 0) -> EvolutionResult:
    """Run the outer EA for ``cfg.outer_budget`` instance evaluations.

    ``graph_ref`` is stored in emitted instance files; without it the edge
    list is embedded inline. Writes ``instance.json``, ``evolution_log.csv``
    and ``summary.json`` when ``out_dir`` is given.
    """
    if graph_ref is None:
        graph_ref = g.edges().tolist()
    parent = init_random(g, cfg.mu_max, cfg.alpha, mix(cfg.seed, "init"),
                         graph_ref=graph_ref, graph_format=graph_format,
                         index_base=index_base)
    f_parent, stats = evaluate_instance(parent, g, cfg, 0)
    initial = f_parent
    s1, s2 = cfg.sigma1, cfg.sigma2
    hi1, hi2 = cfg.mu_max, cfg.mu_max ** 2 / 3.0
    entries = [EvolutionLogEntry(0, f_parent, f_parent, stats.mean, stats.std, s1, s2,
                                 parent.budget, True, False)]

    for gen in range(1, cfg.outer_budget):
        child = mutate_instance(parent, s1, s2, cfg.p_m, mix(cfg.seed, "mutate", gen))
        f_child, c_stats = evaluate_instance(child, g, cfg, gen)
        if cfg.reevaluate_parent:
            f_parent, stats = evaluate_instance(parent, g, cfg, gen, stream="parent")
        accepted = f_child >= f_parent
        success = f_child > f_parent
        if accepted:
            parent, f_parent, stats = child, f_child, c_stats
        s1 = adapt_sigma(s1, success, hi=hi1)
        s2 = adapt_sigma(s2, success, hi=hi2)
        entries.append(EvolutionLogEntry(gen, f_child, f_parent, c_stats.mean, c_stats.std,
                                         s1, s2, child.budget, accepted, success))
        if progress_every and gen % progress_every == 0:
            log.info("generation %d: best %.4f (sigma1 %.3g, sigma2 %.3g)", gen, f_parent, s1, s2)

    provenance = {
        "generator": "ccmaxcov.evolve",
        "config": cfg.to_dict(),
        "fitness": f_parent,
        "initial_fitness": initial,
        "stats": stats.to_dict(),
    }
    best = parent.with_costs(parent.mu, parent.sigma2, seed=cfg.seed, provenance=provenance)
    result = EvolutionResult(best, f_parent, stats, entries, initial)
    if out_dir is not None:
        write_outputs(result, cfg, out_dir)
    return result


def write_log(entries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(LOG_COLUMNS)
        for e in entries:
            w.writerow([_fmt(getattr(e, c)) for c in LOG_COLUMNS])


def read_log(path) -> list[EvolutionLogEntry]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(EvolutionLogEntry(
                generation=int(row["generation"]),
                fitness=float(row["fitness"]), best_fitness=float(row["best_fitness"]),
                mean_ratio=float(row["mean_ratio"]), std_ratio=float(row["std_ratio"]),
                sigma1=float(row["sigma1"]), sigma2=float(row["sigma2"]),
                budget_B=float(row["budget_B"]),
                accepted=row["accepted"] == "1", success=row["success"] == "1"))
    return out


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def write_outputs(result: EvolutionResult, cfg: EvolverConfig, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_instance(result.instance, out / "instance.json")
    write_log(result.log, out / "evolution_log.csv")
    summary = {
        "fitness": result.fitness,
        "initial_fitness": result.initial_fitness,
        "mean_ratio": result.stats.mean,
        "std_ratio": result.stats.std,
        "k_alpha": result.stats.k_alpha,
        "generations": len(result.log),
        "accepted": sum(e.accepted for e in result.log[1:]),
        "successes": sum(e.success for e in result.log),
        "final_sigma1": result.log[-1].sigma1,
        "final_sigma2": result.log[-1].sigma2,
        "config": cfg.to_dict(),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=1) + "\n", encoding="utf-8")
    return out
