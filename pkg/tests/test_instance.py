import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ccmaxcov.graph import from_edges, gen_random_graph
from ccmaxcov.instance import (StochasticInstance, chebyshev_beta, compute_budget,
                               expected_cost, init_random, is_feasible, monte_carlo_violation,
                               penalized_fitness, read_instance, sample_costs, surrogate_load,
                               variance_cost, write_instance)


def make(mu, sigma2, budget, alpha=0.05, mu_max=1000.0):
    return StochasticInstance(mu=mu, sigma2=sigma2, mu_max=mu_max, budget=budget, alpha=alpha)


def test_init_random_invariants_and_budget():
    g = gen_random_graph(300, 0.02, 1)
    inst = init_random(g, 1000.0, 0.05, seed=11)
    inst.check()
    assert inst.n == 300
    assert np.all(inst.mu > 0) and np.all(inst.mu <= 1000)
    assert np.all(inst.sigma2 > 0) and np.all(inst.sigma2 <= inst.mu ** 2 / 3)
    assert inst.budget == pytest.approx(inst.mu.sum() / 30)
    # n/30 * mu_max/2 = 5000 in expectation; sd of sum(mu)/30 is sqrt(300/12)*1000/30 ~ 167
    assert abs(inst.budget - 5000) < 5 * 167


def test_init_random_deterministic_and_errors():
    g = gen_random_graph(50, 0.1, 1)
    assert init_random(g, 1000, 0.05, 3) == init_random(g, 1000, 0.05, 3)
    assert init_random(g, 1000, 0.05, 3) != init_random(g, 1000, 0.05, 4)
    with pytest.raises(ValueError):
        init_random(g, 0, 0.05, 3)


def test_compute_budget():
    assert compute_budget(make(np.full(450, 500.0), np.zeros(450), 1.0)) == pytest.approx(7500)
    assert compute_budget(make(np.zeros(4), np.zeros(4), 1.0)) == 0
    assert compute_budget(make([300.0, 600.0, 900.0], [0, 0, 0], 1.0)) == pytest.approx(60)


def test_cost_moments():
    inst = make([100.0, 200.0], [30.0, 40.0], 1000.0)
    assert (expected_cost(inst, [0, 0]), variance_cost(inst, [0, 0])) == (0, 0)
    assert (expected_cost(inst, [1, 1]), variance_cost(inst, [1, 1])) == (300, 70)
    assert (expected_cost(inst, [0, 1]), variance_cost(inst, [0, 1])) == (200, 40)
    with pytest.raises(ValueError):
        expected_cost(inst, [1])


def test_batch_matches_single():
    rng = np.random.default_rng(5)
    mu = rng.uniform(0, 1000, 12)
    inst = make(mu, mu ** 2 / 3 * rng.random(12), 2000.0)
    xs = (rng.random((200, 12)) < 0.3).astype(np.uint8)
    xs[0] = 0
    for fn in (expected_cost, variance_cost, chebyshev_beta, surrogate_load, is_feasible):
        batch = fn(inst, xs)
        assert batch.shape == (200,)
        np.testing.assert_allclose(batch, [fn(inst, x) for x in xs], rtol=1e-12)
    with pytest.raises(ValueError):
        penalized_fitness(inst, gen_random_graph(12, 0.2, 0), xs)


def test_beta_examples():
    one = make([100.0], [300.0], 200.0)
    assert chebyshev_beta(one, [0]) == 0
    # 300 / (300 + 100**2)
    assert chebyshev_beta(one, [1]) == pytest.approx(300 / 10300)
    assert chebyshev_beta(one, [1]) == pytest.approx(0.029126, abs=1e-6)
    at_budget = make([100.0], [300.0], 100.0)
    assert chebyshev_beta(at_budget, [1]) == 1


def test_surrogate_load_examples():
    one = make([100.0], [300.0], 200.0)
    w = surrogate_load(one, [1])
    assert w == pytest.approx(100 + math.sqrt(19 * 300))
    assert w == pytest.approx(175.50, abs=5e-3)
    assert w <= 200 and chebyshev_beta(one, [1]) <= 0.05
    assert surrogate_load(make([100.0], [0.0], 200.0), [1]) == 100
    assert surrogate_load(one, [0]) == 0


def test_is_feasible_examples():
    assert is_feasible(make([100.0], [300.0], 200.0), [0])
    assert is_feasible(make([100.0], [300.0], 200.0, alpha=0.05), [1])
    assert not is_feasible(make([100.0], [300.0], 200.0, alpha=0.01), [1])


def test_penalized_fitness_examples():
    g = from_edges(2, [(0, 1)])
    inst = make([300.0, 300.0], [3000.0, 3000.0], 250.0)
    # E=600, Var=6000, W = 600 + sqrt(19 * 6000)
    w = 600 + math.sqrt(114000)
    assert penalized_fitness(inst, g, [1, 1]) == pytest.approx(250 - w)
    assert penalized_fitness(inst, g, [1, 1]) == pytest.approx(-687.64, abs=5e-3)
    assert penalized_fitness(inst, g, [0, 0]) == 0
    cheap = make([1.0, 1.0], [0.0, 0.0], 250.0)
    assert penalized_fitness(cheap, g, [1, 0]) == 2


@st.composite
def instance_and_bits(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    mu = np.array(draw(st.lists(st.floats(0, 1000), min_size=n, max_size=n)))
    frac = np.array(draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    budget = draw(st.floats(1, 4000))
    alpha = draw(st.floats(0.001, 0.5))
    x = np.array(draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)), dtype=np.uint8)
    return make(mu, mu ** 2 / 3 * frac, budget, alpha), x


def _equivalent(inst, x):
    beta_ok = chebyshev_beta(inst, x) <= inst.alpha
    w, b = surrogate_load(inst, x), inst.budget
    if math.isclose(w, b, rel_tol=1e-9):
        return True
    return beta_ok == (w <= b)


@given(instance_and_bits())
def test_surrogate_equivalence_property(data):
    inst, x = data
    if expected_cost(inst, x) <= inst.budget:
        assert _equivalent(inst, x)


@given(instance_and_bits())
def test_penalized_sign_matches_feasibility(data):
    inst, x = data
    g = from_edges(inst.n, [])
    f = penalized_fitness(inst, g, x)
    assert (f >= 0) == is_feasible(inst, x)


@given(instance_and_bits(max_n=8))
def test_beta_monotone_under_adding_nodes(data):
    inst, x = data
    base = chebyshev_beta(inst, x)
    for i in np.flatnonzero(x == 0):
        y = x.copy()
        y[i] = 1
        assert chebyshev_beta(inst, y) >= base - 1e-12


def test_round_trip(tmp_path):
    g = gen_random_graph(30, 0.2, 2)
    inst = init_random(g, 1000, 0.05, 9, graph_ref=g.edges().tolist(),
                       provenance={"note": "x"})
    write_instance(inst, tmp_path / "i.json")
    back = read_instance(tmp_path / "i.json")
    assert back == inst
    assert back.resolve_graph() == g
    file_ref = init_random(g, 1000, 0.05, 9, graph_ref="g.mtx", graph_format="mtx")
    write_instance(file_ref, tmp_path / "j.json")
    assert read_instance(tmp_path / "j.json") == file_ref


def test_uniform_cost_samples_match_moments():
    inst = make([100.0, 50.0], [3000.0, 50.0 ** 2 / 3], 1000.0)
    c = sample_costs(inst, 200_000, np.random.default_rng(0))
    assert np.all(c >= 0) and np.all(c <= 2 * inst.mu)
    assert c.mean(axis=0) == pytest.approx(inst.mu, rel=5e-3)
    assert c.var(axis=0) == pytest.approx(inst.sigma2, rel=2e-2)


def test_monte_carlo_conservative_small():
    rng = np.random.default_rng(5)
    g = gen_random_graph(20, 0.2, 5)
    inst = init_random(g, 1000, 0.05, 5)
    x = np.zeros(20, np.uint8)
    for i in rng.permutation(20):
        x[i] = 1
        if not is_feasible(inst, x):
            x[i] = 0
    assert is_feasible(inst, x)
    freq = monte_carlo_violation(inst, x, 50_000, rng)
    assert freq <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / 50_000)
