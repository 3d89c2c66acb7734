"""Command-line interface: ``ccmaxcov <subcommand> ...``.

Option precedence is command-line flag > ``--config`` file > built-in default.
The config file is flat ``key = value`` text whose keys are flag names without
leading dashes (``inner-budget = 2000``); ``#`` starts a comment.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .evolver import EvolverConfig, evaluate_instance, evolve
from .experiment import ExperimentSpec, GraphSource, random_baseline, report, run_experiment
from .graph import gen_random_graph, load_graph, write_edge_list
from .instance import init_random, read_instance, write_instance
from .solvers import ALGORITHMS, SolverConfig, run_batch

OUTPUT_ROOT_ENV = "CCMAXCOV_OUTPUT_ROOT"
RUN_COLUMNS = ["run", "algo", "best_fitness", "evals", "seed"]

log = logging.getLogger("ccmaxcov")


class CLIError(Exception):
    pass


def _algo(s: str) -> str:
    if s.upper() not in ALGORITHMS:
        raise argparse.ArgumentTypeError(f"unknown algorithm {s!r}")
    return s.upper()


def _pairs(s: str) -> list[tuple[str, str]]:
    out = []
    for item in s.split(","):
        easy, sep, hard = item.partition("/")
        if not sep:
            raise argparse.ArgumentTypeError(f"pair {item!r} must look like ea/fga")
        out.append((_algo(easy.strip()), _algo(hard.strip())))
    return out


def _sigmas(s: str) -> list[tuple[float, float]]:
    out = []
    for item in s.split(","):
        a, sep, b = item.partition(":")
        if not sep:
            raise argparse.ArgumentTypeError(f"sigma setting {item!r} must look like 10:33")
        out.append((float(a), float(b)))
    return out


def _csv_list(s: str) -> list[str]:
    return [t.strip() for t in s.split(",") if t.strip()]


def _out_default(name: str) -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, ".")) / name


# ------------------------------------------------------------------ options


def _graph_opts(p, required=True):
    p.add_argument("--graph", required=required, help="graph file")
    p.add_argument("--format", choices=["edgelist", "mtx"], default=None,
                   help="graph file format (default: by suffix, .mtx = MatrixMarket)")
    p.add_argument("--index-base", type=int, choices=[0, 1], default=0,
                   help="node index base of edge-list files")


def _solver_opts(p):
    p.add_argument("--budget", type=int, default=10_000, help="evaluations per solver run")
    p.add_argument("--runs", type=int, default=10, help="independent runs per solver")
    p.add_argument("--fga-beta", type=float, default=1.5, help="FGA power-law exponent")
    p.add_argument("--sa-t0", type=float, default=None, help="SA initial temperature (default n/10)")
    p.add_argument("--sa-cooling", type=float, default=None,
                   help="SA geometric cooling factor (default: 1e-3 of t0 at budget end)")
    p.add_argument("--workers", type=int, default=1, help="threads for independent runs")


def _ratio_opts(p):
    p.add_argument("--confidence", type=float, default=0.99, help="discount confidence level")
    p.add_argument("--k-alpha", type=float, default=None, help="explicit discount multiplier")
    p.add_argument("--epsilon", type=float, default=1e-2, help="floor for non-positive best values")


def _evolver_opts(p):
    p.add_argument("--easy", type=_algo, default="EA")
    p.add_argument("--hard", type=_algo, default="FGA")
    p.add_argument("--fitness", choices=["ratio", "discounted"], default="ratio")
    _ratio_opts(p)
    p.add_argument("--sigma1", type=float, default=10.0, help="initial mutation scale of means")
    p.add_argument("--sigma2", type=float, default=33.0, help="initial mutation scale of variances")
    p.add_argument("--pm", type=float, default=1.0, help="per-node mutation probability")
    p.add_argument("--mu-max", type=float, default=1000.0)
    p.add_argument("--alpha", type=float, default=0.05, help="chance-constraint violation probability")
    p.add_argument("--inner-budget", type=int, default=10_000)
    p.add_argument("--inner-runs", type=int, default=10)
    p.add_argument("--outer-budget", type=int, default=10_000)
    p.add_argument("--reevaluate-parent", action="store_true",
                   help="re-score the parent every generation instead of keeping its stored fitness")
    p.add_argument("--fga-beta", type=float, default=1.5)
    p.add_argument("--sa-t0", type=float, default=None)
    p.add_argument("--sa-cooling", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)


def _evolver_config(a, **over) -> EvolverConfig:
    kw = dict(easy_algo=a.easy, hard_algo=a.hard, fitness_kind=a.fitness, confidence=a.confidence,
              k_alpha=a.k_alpha, inner_runs=a.inner_runs, inner_budget=a.inner_budget,
              outer_budget=a.outer_budget, p_m=a.pm, sigma1=a.sigma1, sigma2=a.sigma2,
              mu_max=a.mu_max, alpha=a.alpha, epsilon=a.epsilon, seed=a.seed,
              reevaluate_parent=a.reevaluate_parent, fga_beta=a.fga_beta, sa_t0=a.sa_t0,
              sa_cooling=a.sa_cooling, workers=a.workers)
    kw.update(over)
    return EvolverConfig(**kw)


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="ccmaxcov", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", default=None, help="flat key = value defaults file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["gen-graph"] = sub.add_parser("gen-graph", help="random G(n, p) graph as an edge list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = subs["init-instance"] = sub.add_parser("init-instance", help="random cost instance for a graph")
    _graph_opts(p)
    p.add_argument("--mu-max", type=float, default=1000.0)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)

    p = subs["solve"] = sub.add_parser("solve", help="run one solver on an instance")
    p.add_argument("--instance", required=True)
    _graph_opts(p, required=False)
    p.add_argument("--algo", type=_algo, required=True)
    _solver_opts(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="runs CSV (default: stdout)")
    p.add_argument("--log-trajectory", default=None, help="per-run best-so-far CSV")

    p = subs["evaluate"] = sub.add_parser("evaluate", help="easy/hard ratio statistics of an instance")
    p.add_argument("--instance", required=True)
    _graph_opts(p, required=False)
    p.add_argument("--easy", type=_algo, required=True)
    p.add_argument("--hard", type=_algo, required=True)
    _solver_opts(p)
    _ratio_opts(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="JSON output (a .csv twin is written next to it)")

    p = subs["evolve"] = sub.add_parser("evolve", help="evolve a discriminating instance")
    _graph_opts(p)
    _evolver_opts(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ROOT_ENV}/evolve)")

    p = subs["experiment"] = sub.add_parser("experiment", help="grid of evolutions plus validation")
    p.add_argument("--graph", action="append", default=None, help="graph file (repeatable)")
    p.add_argument("--random-graph", action="append", default=None, metavar="N,P,SEED",
                   help="generated G(n, p) graph (repeatable)")
    p.add_argument("--format", choices=["edgelist", "mtx"], default=None)
    p.add_argument("--index-base", type=int, choices=[0, 1], default=0)
    p.add_argument("--pairs", type=_pairs, default=[("EA", "FGA")], help="e.g. ea/fga,ea/ghc")
    p.add_argument("--fitnesses", type=_csv_list, default=["ratio"],
                   help="e.g. ratio,discounted@0.9,discounted@0.99")
    p.add_argument("--sigmas", type=_sigmas, default=[(10.0, 33.0)], help="e.g. 10:33,15:75,20:133")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--validation-runs", type=int, default=None)
    _evolver_opts(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)

    p = subs["baseline"] = sub.add_parser("baseline", help="ratio statistics of random instances")
    _graph_opts(p)
    p.add_argument("--pairs", type=_pairs, default=[("EA", "FGA")])
    p.add_argument("--instances", type=int, default=1000)
    _evolver_opts(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None)

    p = subs["report"] = sub.add_parser("report", help="rebuild summary tables of an experiment directory")
    p.add_argument("--dir", required=True)
    p.add_argument("--print", action="store_true", help="also print the Markdown table")
    return parser, subs


# ---------------------------------------------------------------- config file


def read_config(path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CLIError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().lstrip("-")] = value.strip()
    return out


def _apply_config(subparser: argparse.ArgumentParser, config: dict[str, str]) -> None:
    by_dest = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in config.items():
        dest = key.replace("-", "_")
        action = by_dest.get(dest)
        if action is None:
            raise CLIError(f"config key {key!r} is not an option of this command")
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            value = action.type(raw)
        else:
            value = raw
        if action.choices is not None and value not in action.choices:
            raise CLIError(f"config key {key!r}: {raw!r} not in {list(action.choices)}")
        if isinstance(action, argparse._AppendAction):
            value = [value]
        defaults[dest] = value
        action.required = False
    subparser.set_defaults(**defaults)


def parse_args(argv=None) -> argparse.Namespace:
    parser, subs = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        _apply_config(subs[pre.command], read_config(pre.config))
    return parser.parse_args(argv)


# ------------------------------------------------------------------ commands


def _instance_and_graph(a):
    inst = read_instance(a.instance)
    if a.graph:
        g = load_graph(a.graph, a.format, a.index_base)
    else:
        g = inst.resolve_graph(base_dir=Path(a.instance).parent)
    if g.n != inst.n:
        raise CLIError(f"graph has {g.n} nodes but instance has {inst.n}")
    return inst, g


def cmd_gen_graph(a):
    g = gen_random_graph(a.n, a.p, a.seed)
    with open(a.out, "w", encoding="utf-8") as fh:
        write_edge_list(g, fh)
    print(f"wrote {a.out}: n={g.n} m={g.m}")


def cmd_init_instance(a):
    g = load_graph(a.graph, a.format, a.index_base)
    inst = init_random(g, a.mu_max, a.alpha, a.seed, graph_ref=str(a.graph),
                       graph_format=a.format, index_base=a.index_base,
                       provenance={"generator": "ccmaxcov.init_random"})
    write_instance(inst, a.out)
    print(f"wrote {a.out}: n={inst.n} budget={inst.budget:.6g}")


def _solver_cfg(a, algo):
    return SolverConfig(algo, a.budget, 0, a.fga_beta, a.sa_t0, a.sa_cooling)


def cmd_solve(a):
    inst, g = _instance_and_graph(a)
    results = run_batch(_solver_cfg(a, a.algo), inst, g, a.runs, a.seed, workers=a.workers,
                        keep_trace=a.log_trajectory is not None)
    fh = open(a.out, "w", newline="", encoding="utf-8") if a.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(RUN_COLUMNS)
        for i, r in enumerate(results):
            w.writerow([i, r.algorithm, repr(r.best_fitness), r.evals_used, r.seed])
    finally:
        if a.out:
            fh.close()
    if a.log_trajectory:
        with open(a.log_trajectory, "w", newline="", encoding="utf-8") as th:
            w = csv.writer(th)
            w.writerow(["run", "algo", "eval", "best_so_far"])
            for i, r in enumerate(results):
                for ev, best in r.trajectory:
                    w.writerow([i, r.algorithm, ev, repr(best)])


def cmd_evaluate(a):
    inst, g = _instance_and_graph(a)
    cfg = EvolverConfig(easy_algo=a.easy, hard_algo=a.hard, fitness_kind="discounted",
                        confidence=a.confidence, k_alpha=a.k_alpha, inner_runs=a.runs,
                        inner_budget=a.budget, outer_budget=1, epsilon=a.epsilon, seed=a.seed,
                        fga_beta=a.fga_beta, sa_t0=a.sa_t0, sa_cooling=a.sa_cooling,
                        workers=a.workers, mu_max=inst.mu_max, alpha=inst.alpha)
    _, stats = evaluate_instance(inst, g, cfg, 0)
    doc = {"easy": cfg.easy_algo, "hard": cfg.hard_algo, "runs": a.runs, "budget": a.budget,
           "seed": a.seed, "ratio_fitness": stats.mean, **stats.to_dict()}
    text = json.dumps(doc, indent=1)
    print(text)
    if a.out:
        Path(a.out).write_text(text + "\n", encoding="utf-8")
        with open(Path(a.out).with_suffix(".csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["run", "ratio"])
            for i, r in enumerate(stats.per_run_ratios):
                w.writerow([i, repr(r)])


def cmd_evolve(a):
    g = load_graph(a.graph, a.format, a.index_base)
    cfg = _evolver_config(a)
    out = Path(a.out) if a.out else _out_default("evolve")
    res = evolve(g, cfg, out, graph_ref=str(Path(a.graph).resolve()), graph_format=a.format,
                 index_base=a.index_base, progress_every=100)
    print(f"fitness {res.fitness:.6f} (initial {res.initial_fitness:.6f}); "
          f"mean ratio {res.stats.mean:.6f}, std {res.stats.std:.6f}; wrote {out}")


def _graph_sources(a) -> list[GraphSource]:
    srcs = []
    for path in a.graph or []:
        srcs.append(GraphSource(Path(path).stem, str(Path(path).resolve()), a.format, a.index_base))
    for spec in a.random_graph or []:
        n, p, s = spec.split(",")
        g = gen_random_graph(int(n), float(p), int(s))
        srcs.append(GraphSource(f"random-{n}-{p}-{s}", None, None, 0, g))
    if not srcs:
        raise CLIError("experiment needs at least one --graph or --random-graph")
    return srcs


def cmd_experiment(a):
    spec = ExperimentSpec(graphs=_graph_sources(a), pairs=a.pairs, fitness=a.fitnesses,
                          sigma_settings=a.sigmas, repetitions=a.reps,
                          template=_evolver_config(a), out_dir=a.out or _out_default("experiment"),
                          seed=a.seed, validation_runs=a.validation_runs)
    table = run_experiment(spec)
    print(table.to_markdown())


def cmd_baseline(a):
    g = load_graph(a.graph, a.format, a.index_base)
    out = Path(a.out) if a.out else _out_default("baseline")
    table = random_baseline(g, a.pairs, a.instances, _evolver_config(a), a.seed,
                            graph_name=Path(a.graph).stem, out_dir=out)
    print(table.to_markdown())


def cmd_report(a):
    table = report(a.dir)
    if a.print:
        print(table.to_markdown())


COMMANDS = {
    "gen-graph": cmd_gen_graph, "init-instance": cmd_init_instance, "solve": cmd_solve,
    "evaluate": cmd_evaluate, "evolve": cmd_evolve, "experiment": cmd_experiment,
    "baseline": cmd_baseline, "report": cmd_report,
}


def main(argv=None) -> int:
    try:
        a = parse_args(argv)
    except CLIError as exc:
        print(f"ccmaxcov: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[a.command](a)
    except (CLIError, ValueError, OSError, KeyError) as exc:
        print(f"ccmaxcov: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
