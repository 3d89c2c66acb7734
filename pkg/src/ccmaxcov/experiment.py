"""Batch experiments: evolve instances per cell, re-validate them, tabulate.

A cell is one (graph, easy/hard pair, fitness, sigma setting) combination.
Every repetition evolves one instance and then re-scores it with seeds that
never occur during evolution. Summaries are always computed from the
per-instance rows, so ``report`` on the written CSV reproduces them exactly.
"""

from __future__ import annotations

import csv
import logging
import math
import traceback
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .evolver import EvolverConfig, evaluate_instance, evolve
from .graph import Graph, load_graph
from .instance import init_random
from .seeding import mix

log = logging.getLogger(__name__)

STATS = ("average", "std", "min", "max")

INSTANCE_COLUMNS = [
    "graph", "easy", "hard", "fitness", "sigma1", "sigma2", "rep", "seed",
    "initial_fitness", "final_fitness", "train_mean", "train_std",
    "val_mean", "val_std", "val_discounted",
]
RATIO_COLUMNS = ["graph", "easy", "hard", "fitness", "sigma1", "sigma2", "rep", "run", "ratio"]
CELL_KEYS = ["graph", "easy", "hard", "fitness", "sigma1", "sigma2"]
METRICS = ("final_fitness", "val_mean", "val_std")

BASELINE_COLUMNS = ["graph", "easy", "hard", "instance", "seed", "ratio_fitness",
                    "discounted_fitness", "std"]


@dataclass
class GraphSource:
    name: str
    path: str | None = None
    fmt: str | None = None
    index_base: int = 0
    graph: Graph | None = field(default=None, repr=False)

    def load(self) -> Graph:
        if self.graph is None:
            self.graph = load_graph(self.path, self.fmt, self.index_base)
        return self.graph


@dataclass
class ExperimentSpec:
    graphs: list[GraphSource]
    pairs: list[tuple[str, str]]
    fitness: list[str]                              # "ratio" or "discounted@<confidence>"
    sigma_settings: list[tuple[float, float]]
    repetitions: int
    template: EvolverConfig
    out_dir: str | Path
    seed: int
    validation_runs: int | None = None              # default: template.inner_runs

    def validate(self) -> None:
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for src in self.graphs:
            if src.graph is None and (src.path is None or not Path(src.path).is_file()):
                raise FileNotFoundError(f"graph file not found: {src.path}")
        for f in self.fitness:
            parse_fitness(f)
        if not (self.pairs and self.fitness and self.sigma_settings and self.graphs):
            raise ValueError("experiment has no cells")


def parse_fitness(label: str) -> tuple[str, float]:
    """``"ratio"`` -> ("ratio", 0.99); ``"discounted@0.9"`` -> ("discounted", 0.9)."""
    if label == "ratio":
        return "ratio", 0.99
    kind, _, conf = label.partition("@")
    if kind != "discounted":
        raise ValueError(f"unknown fitness label {label!r}")
    c = float(conf) if conf else 0.99
    if not 0 < c < 1:
        raise ValueError(f"confidence must lie in (0, 1): {label!r}")
    return kind, c


def aggregate(values) -> dict:
    """average / sample std / min / max; std is 0 for a single value."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return {s: math.nan for s in STATS}
    return {
        "average": float(v.mean()),
        "std": float(v.std(ddof=1)) if v.size > 1 else 0.0,
        "min": float(v.min()),
        "max": float(v.max()),
    }


@dataclass
class SummaryTable:
    """One row per cell; metric columns are ``<metric>_<stat>``."""

    rows: list[dict]
    columns: list[str]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=self.columns)
            w.writeheader()
            for r in self.rows:
                w.writerow({k: _cell(r[k]) for k in self.columns})

    def to_markdown(self, digits: int = 4) -> str:
        head = "| " + " | ".join(self.columns) + " |"
        rule = "|" + "|".join("---" for _ in self.columns) + "|"
        body = []
        for r in self.rows:
            body.append("| " + " | ".join(
                f"{r[c]:.{digits}f}" if isinstance(r[c], float) else str(r[c])
                for c in self.columns) + " |")
        return "\n".join([head, rule, *body]) + "\n"


def _cell(v):
    return repr(v) if isinstance(v, float) else v


def _write_rows(path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=columns)
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(r[k]) for k in columns})


_INT_COLUMNS = {"rep", "run", "seed", "instance"}
_STR_COLUMNS = {"graph", "easy", "hard", "fitness"}


def read_rows(path) -> list[dict]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append({k: (v if k in _STR_COLUMNS else int(v) if k in _INT_COLUMNS else float(v))
                        for k, v in row.items()})
    return out


def summarize(instance_rows: list[dict], ratio_rows: list[dict] | None = None) -> SummaryTable:
    """Aggregate per-instance rows into one row per cell (first-seen order).

    With ``ratio_rows`` the pooled mean/std over all validation ratios of a
    cell is added as well.
    """
    cells: dict[tuple, list[dict]] = {}
    for r in instance_rows:
        cells.setdefault(tuple(r[k] for k in CELL_KEYS), []).append(r)
    pooled: dict[tuple, list[float]] = {}
    for r in ratio_rows or []:
        pooled.setdefault(tuple(r[k] for k in CELL_KEYS), []).append(r["ratio"])

    columns = CELL_KEYS + ["instances"]
    columns += [f"{m}_{s}" for m in METRICS for s in STATS]
    if ratio_rows is not None:
        columns += ["pooled_mean", "pooled_std"]
    rows = []
    for key, rs in cells.items():
        row = dict(zip(CELL_KEYS, key))
        row["instances"] = len(rs)
        for m in METRICS:
            for s, v in aggregate([r[m] for r in rs]).items():
                row[f"{m}_{s}"] = v
        if ratio_rows is not None:
            agg = aggregate(pooled.get(key, []))
            row["pooled_mean"], row["pooled_std"] = agg["average"], agg["std"]
        rows.append(row)
    return SummaryTable(rows, columns)


def _cell_config(spec: ExperimentSpec, src: GraphSource, pair, fitness_label, sig, rep) -> EvolverConfig:
    kind, conf = parse_fitness(fitness_label)
    seed = mix(spec.seed, src.name, pair[0], pair[1], fitness_label, repr(sig), rep)
    return replace(spec.template, easy_algo=pair[0], hard_algo=pair[1], fitness_kind=kind,
                   confidence=conf, sigma1=float(sig[0]), sigma2=float(sig[1]), seed=seed)


def run_experiment(spec: ExperimentSpec) -> SummaryTable:
    """Evolve ``repetitions`` instances per cell, validate, and write tables.

    Outputs in ``spec.out_dir``: ``instances.csv``, ``validation_ratios.csv``,
    ``summary.csv``, ``summary.md``, ``failures.csv`` (if any) and one
    sub-directory per evolved instance.
    """
    spec.validate()
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    inst_rows, ratio_rows, failures = [], [], []
    for src in spec.graphs:
        g = src.load()
        for pair in spec.pairs:
            for fit in spec.fitness:
                for sig in spec.sigma_settings:
                    cell_dir = out / src.name / f"{pair[0]}-{pair[1]}" / fit.replace("@", "-") / f"{sig[0]:g}-{sig[1]:g}"
                    for rep in range(spec.repetitions):
                        try:
                            cfg = _cell_config(spec, src, pair, fit, sig, rep)
                            res = evolve(g, cfg, cell_dir / f"rep{rep:02d}", graph_ref=src.path,
                                         graph_format=src.fmt, index_base=src.index_base)
                            vcfg = replace(cfg, inner_runs=spec.validation_runs or cfg.inner_runs)
                            _, vstats = evaluate_instance(res.instance, g, vcfg, 0, stream="validate")
                        except Exception as exc:  # noqa: BLE001 - keep remaining cells going
                            log.error("cell %s %s %s %s rep %d failed: %s", src.name, pair, fit, sig, rep, exc)
                            failures.append({"graph": src.name, "easy": pair[0], "hard": pair[1],
                                             "fitness": fit, "sigma1": sig[0], "sigma2": sig[1],
                                             "rep": rep, "error": traceback.format_exception_only(type(exc), exc)[-1].strip()})
                            continue
                        base = {"graph": src.name, "easy": cfg.easy_algo, "hard": cfg.hard_algo,
                                "fitness": fit, "sigma1": cfg.sigma1, "sigma2": cfg.sigma2, "rep": rep}
                        inst_rows.append({**base, "seed": cfg.seed,
                                          "initial_fitness": res.initial_fitness,
                                          "final_fitness": res.fitness,
                                          "train_mean": res.stats.mean, "train_std": res.stats.std,
                                          "val_mean": vstats.mean, "val_std": vstats.std,
                                          "val_discounted": vstats.mean - cfg.k * vstats.std})
                        for i, r in enumerate(vstats.per_run_ratios):
                            ratio_rows.append({**base, "run": i, "ratio": r})
    return _write_experiment(out, inst_rows, ratio_rows, failures)


def _write_experiment(out: Path, inst_rows, ratio_rows, failures) -> SummaryTable:
    _write_rows(out / "instances.csv", INSTANCE_COLUMNS, inst_rows)
    _write_rows(out / "validation_ratios.csv", RATIO_COLUMNS, ratio_rows)
    if failures:
        _write_rows(out / "failures.csv", list(failures[0]), failures)
    table = summarize(inst_rows, ratio_rows)
    table.to_csv(out / "summary.csv")
    (out / "summary.md").write_text(table.to_markdown(), encoding="utf-8")
    return table


def report(out_dir) -> SummaryTable:
    """Rebuild ``summary.csv``/``summary.md`` from the per-instance CSVs in ``out_dir``."""
    out = Path(out_dir)
    inst_rows = read_rows(out / "instances.csv")
    ratio_path = out / "validation_ratios.csv"
    ratio_rows = read_rows(ratio_path) if ratio_path.exists() else None
    table = summarize(inst_rows, ratio_rows)
    table.to_csv(out / "summary.csv")
    (out / "summary.md").write_text(table.to_markdown(), encoding="utf-8")
    return table


def random_baseline(g: Graph, pairs, instances: int, template: EvolverConfig, seed: int,
                    graph_name: str = "graph", out_dir=None) -> SummaryTable:
    """Score ``instances`` unevolved random instances under both fitness functions.

    One evaluation per instance supplies both the plain mean ratio and the
    discounted value (``template.confidence`` or ``template.k_alpha``).
    """
    if instances < 1:
        raise ValueError("instances must be >= 1")
    disc = replace(template, fitness_kind="discounted")
    rows = []
    for easy, hard in pairs:
        cfg = replace(disc, easy_algo=easy, hard_algo=hard)
        for i in range(instances):
            s = mix(seed, "baseline", i)
            inst = init_random(g, cfg.mu_max, cfg.alpha, s)
            f, stats = evaluate_instance(inst, g, replace(cfg, seed=s), 0)
            rows.append({"graph": graph_name, "easy": cfg.easy_algo, "hard": cfg.hard_algo,
                         "instance": i, "seed": s, "ratio_fitness": stats.mean,
                         "discounted_fitness": f, "std": stats.std})
    table = summarize_baseline(rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_rows(out / "baseline_instances.csv", BASELINE_COLUMNS, rows)
        table.to_csv(out / "baseline_summary.csv")
        (out / "baseline_summary.md").write_text(table.to_markdown(), encoding="utf-8")
    return table


def summarize_baseline(rows: list[dict]) -> SummaryTable:
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["graph"], r["easy"], r["hard"]), []).append(r)
    columns = ["graph", "easy", "hard", "instances"]
    columns += [f"{m}_{s}" for m in ("ratio_fitness", "discounted_fitness") for s in STATS]
    out = []
    for (gname, easy, hard), rs in groups.items():
        row = {"graph": gname, "easy": easy, "hard": hard, "instances": len(rs)}
        for m in ("ratio_fitness", "discounted_fitness"):
            for s, v in aggregate([r[m] for r in rs]).items():
                row[f"{m}_{s}"] = v
        out.append(row)
    return SummaryTable(out, columns)
