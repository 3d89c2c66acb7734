"""Evolving chance-constrained maximum coverage instances that separate two solvers."""

__version__ = "0.1.0"

from ._accel import USE_NUMBA
from .evolver import EvolverConfig, adapt_sigma, evaluate_instance, evolve, mutate_instance
from .graph import (Graph, coverage, from_edges, gen_random_graph, load_edge_list,
                    load_graph, load_matrix_market)
from .instance import (StochasticInstance, chebyshev_beta, compute_budget, expected_cost,
                       init_random, is_feasible, penalized_fitness, read_instance,
                       surrogate_load, variance_cost, write_instance)
from .ratio import (RatioStats, discounted_fitness, floor_performance, paired_ratios,
                    ratio_fitness)
from .solvers import SolverConfig, SolverRunResult, run_batch, run_solver

__all__ = [
    "USE_NUMBA", "Graph", "coverage", "from_edges", "gen_random_graph", "load_edge_list",
    "load_graph", "load_matrix_market", "StochasticInstance", "chebyshev_beta",
    "compute_budget", "expected_cost", "init_random", "is_feasible", "penalized_fitness",
    "read_instance", "surrogate_load", "variance_cost", "write_instance", "RatioStats",
    "discounted_fitness", "floor_performance", "paired_ratios", "ratio_fitness",
    "SolverConfig", "SolverRunResult", "run_batch", "run_solver", "EvolverConfig",
    "adapt_sigma", "evaluate_instance", "evolve", "mutate_instance",
]
