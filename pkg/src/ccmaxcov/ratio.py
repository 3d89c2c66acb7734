"""Performance ratios between an easy and a hard solver on one instance."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from statistics import NormalDist

import numpy as np

EPSILON = 1e-2

# one-sided standard normal quantiles
K_ALPHA = {0.90: NormalDist().inv_cdf(0.90), 0.99: NormalDist().inv_cdf(0.99)}


@dataclass(frozen=True)
class RatioStats:
    per_run_ratios: tuple
    mean: float
    std: float
    k_alpha: float
    discounted: float
    epsilon: float = EPSILON

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_run_ratios"] = list(self.per_run_ratios)
        return d


def k_for_confidence(confidence: float) -> float:
    """Multiplier for a one-sided confidence level, e.g. 0.99 -> 2.3263."""
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    return NormalDist().inv_cdf(confidence)


def floor_performance(p: float, epsilon: float = EPSILON) -> float:
    """Replace a non-positive best value (no useful feasible solution) by epsilon."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return p if p > 0 else epsilon


def paired_ratios(perf_easy, perf_hard, epsilon: float = EPSILON) -> np.ndarray:
    """Run-by-run quotients of floored best values."""
    a = np.asarray(perf_easy, dtype=np.float64)
    b = np.asarray(perf_hard, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"batch lengths differ: {a.shape} vs {b.shape}")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    a = np.where(a > 0, a, epsilon)
    b = np.where(b > 0, b, epsilon)
    return a / b


def ratio_fitness(ratios) -> float:
    """Arithmetic mean of the per-run ratios."""
    return discounted_fitness(ratios, k=0.0).mean


def discounted_fitness(ratios, confidence: float | None = None, k: float | None = None,
                       epsilon: float = EPSILON) -> RatioStats:
    """Mean ratio minus ``k`` sample standard deviations.

    Give either a ``confidence`` level or an explicit ``k``. A single ratio has
    std 0.
    """
    r = np.asarray(ratios, dtype=np.float64)
    if r.size == 0:
        raise ValueError("no ratios")
    if k is None:
        if confidence is None:
            raise ValueError("need confidence or k")
        k = k_for_confidence(confidence)
    if np.all(r == r[0]):
        mean, std = float(r[0]), 0.0
    else:
        mean, std = float(r.mean()), float(r.std(ddof=1))
    return RatioStats(per_run_ratios=tuple(float(v) for v in r), mean=mean, std=std,
                      k_alpha=float(k), discounted=mean - k * std, epsilon=epsilon)
