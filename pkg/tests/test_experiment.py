import csv

import pytest

from ccmaxcov.evolver import EvolverConfig
from ccmaxcov.experiment import (ExperimentSpec, GraphSource, aggregate, parse_fitness,
                                 random_baseline, read_rows, report, run_experiment, summarize)
from ccmaxcov.graph import gen_random_graph


@pytest.fixture(scope="module")
def graph():
    return gen_random_graph(35, 0.1, 4)


def make_spec(graph, out, **kw):
    args = dict(graphs=[GraphSource("toy", graph=graph)], pairs=[("EA", "FGA")],
                fitness=["ratio"], sigma_settings=[(10.0, 33.0)], repetitions=2,
                template=EvolverConfig(inner_runs=3, inner_budget=200, outer_budget=6),
                out_dir=out, seed=11)
    args.update(kw)
    return ExperimentSpec(**args)


def test_aggregate():
    assert aggregate([2.0]) == {"average": 2.0, "std": 0.0, "min": 2.0, "max": 2.0}
    a = aggregate([1.0, 3.0])
    assert a["average"] == 2 and a["std"] == pytest.approx(2 ** 0.5)


def test_parse_fitness():
    assert parse_fitness("ratio") == ("ratio", 0.99)
    assert parse_fitness("discounted@0.9") == ("discounted", 0.9)
    with pytest.raises(ValueError):
        parse_fitness("bogus")


def test_run_experiment_one_row_two_instances(graph, tmp_path):
    table = run_experiment(make_spec(graph, tmp_path / "a"))
    assert len(table.rows) == 1
    row = table.rows[0]
    assert row["instances"] == 2
    for m in ("final_fitness", "val_mean", "val_std"):
        assert row[f"{m}_min"] <= row[f"{m}_average"] <= row[f"{m}_max"]
    inst = read_rows(tmp_path / "a" / "instances.csv")
    assert len(inst) == 2
    # validation seeds differ from training seeds, so values generally differ
    assert {r["rep"] for r in inst} == {0, 1}
    assert (tmp_path / "a" / "toy" / "EA-FGA" / "ratio" / "10-33" / "rep01" / "instance.json").exists()


def test_experiment_deterministic_and_report_exact(graph, tmp_path):
    spec = make_spec(graph, tmp_path / "a", fitness=["ratio", "discounted@0.99"])
    run_experiment(spec)
    run_experiment(make_spec(graph, tmp_path / "b", fitness=["ratio", "discounted@0.99"]))
    for name in ("instances.csv", "validation_ratios.csv", "summary.csv", "summary.md"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    before = (tmp_path / "a" / "summary.csv").read_bytes()
    table = report(tmp_path / "a")
    assert (tmp_path / "a" / "summary.csv").read_bytes() == before
    assert table.rows == summarize(read_rows(tmp_path / "a" / "instances.csv"),
                                   read_rows(tmp_path / "a" / "validation_ratios.csv")).rows
    with open(tmp_path / "a" / "summary.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == table.columns


def test_failures_are_recorded_and_others_continue(graph, tmp_path, monkeypatch):
    import ccmaxcov.experiment as exp

    real = exp.evolve

    def flaky(g, cfg, *args, **kwargs):
        if g.n == 10:
            raise RuntimeError("boom")
        return real(g, cfg, *args, **kwargs)

    monkeypatch.setattr(exp, "evolve", flaky)
    spec = make_spec(graph, tmp_path / "f", repetitions=1,
                     graphs=[GraphSource("toy", graph=graph),
                             GraphSource("bad", graph=gen_random_graph(10, 0.3, 1)),
                             GraphSource("other", graph=gen_random_graph(12, 0.3, 1))])
    table = run_experiment(spec)
    assert [r["graph"] for r in table.rows] == ["toy", "other"]
    with open(tmp_path / "f" / "failures.csv", newline="") as fh:
        fails = list(csv.DictReader(fh))
    assert [f["graph"] for f in fails] == ["bad"]
    assert "boom" in fails[0]["error"]


def test_spec_validation(tmp_path, graph):
    with pytest.raises(FileNotFoundError):
        make_spec(graph, tmp_path, graphs=[GraphSource("x", path=str(tmp_path / "missing.txt"))]).validate()
    with pytest.raises(ValueError):
        make_spec(graph, tmp_path, repetitions=0).validate()


def test_random_baseline(graph, tmp_path):
    tmpl = EvolverConfig(inner_runs=3, inner_budget=200, confidence=0.99)
    one = random_baseline(graph, [("EA", "FGA")], 1, tmpl, seed=2)
    r = one.rows[0]
    assert r["ratio_fitness_min"] == r["ratio_fitness_max"] == r["ratio_fitness_average"]
    many = random_baseline(graph, [("EA", "FGA"), ("EA", "SA")], 4, tmpl, seed=2, out_dir=tmp_path)
    assert len(many.rows) == 2
    for row in many.rows:
        assert row["discounted_fitness_average"] <= row["ratio_fitness_average"]
    assert (tmp_path / "baseline_summary.md").exists()
