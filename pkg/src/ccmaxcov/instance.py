"""Stochastic node costs, the Chebyshev feasibility surrogate and penalized fitness."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import _kernels
from .graph import Graph, coverage, from_edges, load_graph

BUDGET_DIVISOR = 30.0


@dataclass(frozen=True, eq=False)
class StochasticInstance:
    """Independent uniform node costs with means ``mu`` and variances ``sigma2``.

    ``graph_ref`` is either a path to a graph file or an inline ``[[u, v], ...]``
    edge list; ``graph_format``/``index_base`` apply to the file case.
    """

    mu: np.ndarray
    sigma2: np.ndarray
    mu_max: float
    budget: float
    alpha: float
    graph_ref: Any = None
    graph_format: str | None = None
    index_base: int = 0
    seed: int | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=np.float64)
        s2 = np.array(self.sigma2, dtype=np.float64)
        if mu.ndim != 1 or mu.shape != s2.shape:
            raise ValueError("mu and sigma2 must be 1-d arrays of equal length")
        mu.flags.writeable = False
        s2.flags.writeable = False
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma2", s2)

    @property
    def n(self) -> int:
        return int(self.mu.shape[0])

    def check(self, rtol: float = 1e-12) -> None:
        """Raise ValueError if any model invariant is violated."""
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.budget > 0:
            raise ValueError(f"budget must be positive, got {self.budget}")
        if np.any(self.mu < 0) or np.any(self.mu > self.mu_max):
            raise ValueError("expected costs must lie in [0, mu_max]")
        if np.any(self.sigma2 < 0) or np.any(self.sigma2 > self.mu ** 2 / 3.0 * (1 + rtol)):
            raise ValueError("variances must lie in [0, mu^2/3]")

    def __eq__(self, other):
        if not isinstance(other, StochasticInstance):
            return NotImplemented
        return (np.array_equal(self.mu, other.mu)
                and np.array_equal(self.sigma2, other.sigma2)
                and self.mu_max == other.mu_max and self.budget == other.budget
                and self.alpha == other.alpha and self.graph_ref == other.graph_ref
                and self.graph_format == other.graph_format
                and self.index_base == other.index_base
                and self.seed == other.seed and self.provenance == other.provenance)

    def with_costs(self, mu, sigma2, **changes) -> "StochasticInstance":
        """Copy with new cost vectors and the budget recomputed from them."""
        mu = np.asarray(mu, dtype=np.float64)
        return replace(self, mu=mu, sigma2=sigma2, budget=budget_from_means(mu), **changes)

    def resolve_graph(self, base_dir: str | Path | None = None) -> Graph:
        if self.graph_ref is None:
            raise ValueError("instance carries no graph reference")
        if isinstance(self.graph_ref, str):
            path = Path(self.graph_ref)
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            return load_graph(path, self.graph_format, self.index_base)
        return from_edges(self.n, self.graph_ref)


def budget_from_means(mu) -> float:
    return float(np.sum(mu) / BUDGET_DIVISOR)


def compute_budget(inst: StochasticInstance) -> float:
    """``sum(mu) / 30``; equals ``n/30 * mu_max/2`` in expectation for fresh instances."""
    return budget_from_means(inst.mu)


def init_random(g: Graph, mu_max: float, alpha: float, seed: int, **kwargs) -> StochasticInstance:
    """Draw ``mu_i ~ U(0, mu_max]`` and ``sigma2_i ~ U(0, mu_i^2/3]`` for every node."""
    if not mu_max > 0:
        raise ValueError(f"mu_max must be positive, got {mu_max}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    rng = np.random.default_rng(seed)
    mu = mu_max * (1.0 - rng.random(g.n))
    sigma2 = mu ** 2 / 3.0 * (1.0 - rng.random(g.n))
    return StochasticInstance(mu=mu, sigma2=sigma2, mu_max=float(mu_max),
                              budget=budget_from_means(mu), alpha=float(alpha),
                              seed=seed, **kwargs)


def _bits(inst: StochasticInstance, x) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim not in (1, 2) or x.shape[-1] != inst.n:
        raise ValueError(f"solution shape {x.shape} does not match n={inst.n}")
    return x.astype(bool, copy=False)


def _single(inst: StochasticInstance, x) -> np.ndarray:
    b = _bits(inst, x)
    if b.ndim != 1:
        raise ValueError(f"expected a single solution of length {inst.n}, got shape {b.shape}")
    return b


def _sum_selected(values: np.ndarray, b: np.ndarray):
    if b.ndim == 1:
        return float(values[b].sum())
    return np.where(b, values, 0.0).sum(axis=1)


def expected_cost(inst: StochasticInstance, x):
    """Sum of selected means; a (k, n) batch of solutions gives a length-k array."""
    return _sum_selected(inst.mu, _bits(inst, x))


def variance_cost(inst: StochasticInstance, x):
    return _sum_selected(inst.sigma2, _bits(inst, x))


def chebyshev_beta(inst: StochasticInstance, x):
    """One-sided Chebyshev upper bound on ``Pr(C(x) > B)``.

    Returns 1 once the expected cost reaches the budget (unless the cost is
    deterministic and within budget, which gives 0). Accepts a batch like
    :func:`expected_cost`.
    """
    e, v = expected_cost(inst, x), variance_cost(inst, x)
    if np.ndim(e) == 0:
        return _kernels._beta(e, v, inst.budget)
    d = inst.budget - e
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = np.where(e >= inst.budget, 1.0, v / (v + d * d))
    return np.where((v <= 0) & (e <= inst.budget), 0.0, beta)


def surrogate_load(inst: StochasticInstance, x):
    """``E + sqrt((1 - alpha)/alpha * Var)``; at most B exactly when the bound holds."""
    e, v = expected_cost(inst, x), variance_cost(inst, x)
    if np.ndim(e) == 0:
        return _kernels._load(e, v, inst.alpha)
    return e + np.sqrt((1.0 - inst.alpha) / inst.alpha * np.maximum(v, 0.0))


def is_feasible(inst: StochasticInstance, x):
    beta = chebyshev_beta(inst, x)
    return bool(beta <= inst.alpha) if np.ndim(beta) == 0 else beta <= inst.alpha


def penalized_fitness(inst: StochasticInstance, g: Graph, x) -> float:
    """Coverage if feasible, else ``B - load`` (strictly negative)."""
    if g.n != inst.n:
        raise ValueError(f"graph has {g.n} nodes, instance has {inst.n}")
    b = _single(inst, x)
    return _kernels._penalized(coverage(g, b), expected_cost(inst, b),
                               variance_cost(inst, b), inst.budget, inst.alpha)


def sample_costs(inst: StochasticInstance, size: int, rng: np.random.Generator,
                 nodes=None) -> np.ndarray:
    """Draw ``size`` cost vectors, each ``c_i ~ U[mu_i - sqrt(3 s2_i), mu_i + sqrt(3 s2_i)]``."""
    mu, s2 = inst.mu, inst.sigma2
    if nodes is not None:
        mu, s2 = mu[nodes], s2[nodes]
    half = np.sqrt(3.0 * s2)
    return mu + half * rng.uniform(-1.0, 1.0, size=(size, mu.shape[0]))


# ------------------------------------------------------------------ file I/O


def instance_to_dict(inst: StochasticInstance) -> dict:
    return {
        "n": inst.n,
        "graph": inst.graph_ref,
        "graph_format": inst.graph_format,
        "index_base": inst.index_base,
        "mu": inst.mu.tolist(),
        "sigma2": inst.sigma2.tolist(),
        "alpha": inst.alpha,
        "budget": inst.budget,
        "mu_max": inst.mu_max,
        "seed": inst.seed,
        "provenance": inst.provenance,
    }


def instance_from_dict(d: dict) -> StochasticInstance:
    graph = d.get("graph")
    if isinstance(graph, list):
        graph = [list(map(int, e)) for e in graph]
    inst = StochasticInstance(
        mu=d["mu"], sigma2=d["sigma2"], mu_max=float(d["mu_max"]),
        budget=float(d["budget"]), alpha=float(d["alpha"]), graph_ref=graph,
        graph_format=d.get("graph_format"), index_base=int(d.get("index_base", 0)),
        seed=d.get("seed"), provenance=dict(d.get("provenance") or {}),
    )
    if "n" in d and int(d["n"]) != inst.n:
        raise ValueError(f"instance declares n={d['n']} but carries {inst.n} costs")
    return inst


def write_instance(inst: StochasticInstance, path) -> None:
    # json emits shortest round-trip reprs, so floats survive exactly
    text = json.dumps(instance_to_dict(inst), indent=1, allow_nan=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_instance(path) -> StochasticInstance:
    return instance_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def monte_carlo_violation(inst: StochasticInstance, x, samples: int,
                          rng: np.random.Generator, chunk: int = 20000) -> float:
    """Empirical ``Pr(C(x) > B)`` under independent uniform costs."""
    nodes = np.flatnonzero(_single(inst, x))
    hits = 0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        total = sample_costs(inst, k, rng, nodes).sum(axis=1)
        hits += int(np.count_nonzero(total > inst.budget))
        done += k
    return hits / samples


__all__ = [
    "StochasticInstance", "init_random", "compute_budget", "budget_from_means",
    "expected_cost", "variance_cost", "chebyshev_beta", "surrogate_load",
    "is_feasible", "penalized_fitness", "sample_costs", "monte_carlo_violation",
    "write_instance", "read_instance", "instance_to_dict", "instance_from_dict",
]
