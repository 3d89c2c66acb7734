import csv
import json

import pytest

from ccmaxcov.cli import main, read_config
from ccmaxcov.experiment import read_rows
from ccmaxcov.instance import read_instance


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["gen-graph", "--n", "40", "--p", "0.1", "--seed", "1", "--out", "g.txt"]) == 0
    assert main(["init-instance", "--graph", "g.txt", "--seed", "2", "--out", "inst.json"]) == 0
    return tmp_path


def test_init_instance_file(workdir):
    inst = read_instance(workdir / "inst.json")
    inst.check()
    assert inst.n == 40 and inst.alpha == 0.05 and inst.mu_max == 1000
    doc = json.loads((workdir / "inst.json").read_text())
    assert set(doc) >= {"n", "graph", "mu", "sigma2", "alpha", "budget", "mu_max", "seed", "provenance"}


def test_mtx_input(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "p.mtx").write_text("%%MatrixMarket matrix coordinate pattern symmetric\n4 4 3\n1 2\n2 3\n3 4\n")
    assert main(["init-instance", "--graph", "p.mtx", "--format", "mtx", "--seed", "1", "--out", "i.json"]) == 0
    assert main(["solve", "--instance", "i.json", "--algo", "rls", "--budget", "50", "--runs", "2",
                 "--seed", "3", "--out", "r.csv"]) == 0


def test_solve_csv_and_trajectory(workdir):
    rc = main(["solve", "--instance", "inst.json", "--algo", "sa", "--budget", "300", "--runs", "3",
               "--seed", "5", "--out", "runs.csv", "--log-trajectory", "traj.csv"])
    assert rc == 0
    with open(workdir / "runs.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert list(rows[0]) == ["run", "algo", "best_fitness", "evals", "seed"]
    assert [int(r["run"]) for r in rows] == [0, 1, 2]
    assert all(r["algo"] == "SA" and r["evals"] == "300" for r in rows)
    with open(workdir / "traj.csv", newline="") as fh:
        traj = list(csv.DictReader(fh))
    for run in "012":
        best = [float(r["best_so_far"]) for r in traj if r["run"] == run]
        assert best == sorted(best)
    main(["solve", "--instance", "inst.json", "--algo", "sa", "--budget", "300", "--runs", "3",
          "--seed", "5", "--out", "runs2.csv"])
    assert (workdir / "runs.csv").read_bytes() == (workdir / "runs2.csv").read_bytes()


def test_evaluate_outputs(workdir, capsys):
    rc = main(["evaluate", "--instance", "inst.json", "--easy", "ea", "--hard", "fga", "--runs", "4",
               "--budget", "200", "--confidence", "0.9", "--seed", "1", "--out", "ev.json"])
    assert rc == 0
    doc = json.loads((workdir / "ev.json").read_text())
    assert len(doc["per_run_ratios"]) == 4
    assert doc["discounted"] == pytest.approx(doc["mean"] - doc["k_alpha"] * doc["std"])
    assert doc["k_alpha"] == pytest.approx(1.2816, abs=1e-4)
    assert (workdir / "ev.csv").exists()
    capsys.readouterr()
    main(["evaluate", "--instance", "inst.json", "--easy", "ea", "--hard", "fga", "--runs", "4",
          "--budget", "200", "--k-alpha", "0", "--seed", "1"])
    plain = json.loads(capsys.readouterr().out)
    assert plain["discounted"] == plain["mean"] == doc["mean"]


def test_evolve_with_config_precedence(workdir):
    (workdir / "cfg.txt").write_text("# toy scale\ninner-budget = 150\ninner-runs = 2\n"
                                     "outer-budget = 9\nfitness = discounted\n")
    rc = main(["--config", "cfg.txt", "evolve", "--graph", "g.txt", "--seed", "4",
               "--outer-budget", "5", "--out", "evo"])
    assert rc == 0
    summary = json.loads((workdir / "evo" / "summary.json").read_text())
    assert summary["generations"] == 5                  # flag beats config
    assert summary["config"]["inner_budget"] == 150     # config beats default
    assert summary["config"]["fitness_kind"] == "discounted"
    inst = read_instance(workdir / "evo" / "instance.json")
    assert inst.resolve_graph().n == 40


def test_read_config_errors(tmp_path):
    (tmp_path / "bad.txt").write_text("no equals sign\n")
    with pytest.raises(Exception):
        read_config(tmp_path / "bad.txt")
    (tmp_path / "unknown.txt").write_text("not-a-flag = 3\n")
    assert main(["--config", str(tmp_path / "unknown.txt"), "report", "--dir", "."]) == 2


def test_experiment_and_report(workdir, monkeypatch):
    monkeypatch.setenv("CCMAXCOV_OUTPUT_ROOT", str(workdir / "root"))
    rc = main(["experiment", "--graph", "g.txt", "--pairs", "ea/fga", "--fitnesses", "ratio",
               "--sigmas", "10:33,20:133", "--reps", "2", "--inner-budget", "150",
               "--inner-runs", "2", "--outer-budget", "4", "--seed", "8"])
    assert rc == 0
    out = workdir / "root" / "experiment"
    rows = read_rows(out / "summary.csv")
    assert len(rows) == 2 and all(r["instances"] == 2 for r in rows)
    before = (out / "summary.csv").read_bytes()
    assert main(["report", "--dir", str(out)]) == 0
    assert (out / "summary.csv").read_bytes() == before


def test_experiment_requires_seed(workdir):
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "--graph", "g.txt"])
    assert exc.value.code != 0


def test_baseline(workdir):
    rc = main(["baseline", "--graph", "g.txt", "--instances", "2", "--inner-budget", "150",
               "--inner-runs", "2", "--seed", "1", "--out", "base"])
    assert rc == 0
    rows = read_rows(workdir / "base" / "baseline_instances.csv")
    assert len(rows) == 2


def test_errors_exit_nonzero(workdir, capsys):
    assert main(["solve", "--instance", "missing.json", "--algo", "ea", "--seed", "1"]) == 1
    assert "error" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["solve", "--instance", "inst.json", "--algo", "zzz", "--seed", "1"])
    (workdir / "bad.txt").write_text("0 1\n1 x\n")
    assert main(["init-instance", "--graph", "bad.txt", "--seed", "1", "--out", "o.json"]) == 1
