import io

import numpy as np
import pytest
from hypothesis import settings

from ccmaxcov.graph import from_edges, gen_random_graph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def brute_coverage(n, edges, x):
    """Set-based coverage oracle, independent of the CSR kernels."""
    nbrs = {i: set() for i in range(n)}
    for u, v in edges:
        if u != v:
            nbrs[u].add(v)
            nbrs[v].add(u)
    covered = set()
    for i in range(n):
        if x[i]:
            covered.add(i)
            covered |= nbrs[i]
    return len(covered)


@pytest.fixture
def path3():
    return from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def k3():
    return from_edges(3, [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def small_graph():
    return gen_random_graph(40, 0.1, seed=7)


def text(*lines):
    return io.StringIO("\n".join(lines) + "\n")
