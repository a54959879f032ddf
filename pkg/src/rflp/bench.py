"""Benchmark harness: solver dispatch, per-cell seeding, CSV results and summaries.

Raw results (``results.csv``) have one row per (instance, solver, run) cell:

    instance_id, solver, model, run, seed, best_objective, time_ms, evals,
    is_optimal, best_genotype, status

``is_optimal`` is empty unless the oracle solved that instance.  ``status`` is
``ok`` or ``error: <message>``.  Summaries (``summary.csv``) have one row per
(instance, solver) with AOV, Gap against the reference solver (in percent),
Optimal Rate, mean time and a Wilcoxon test against the reference.
"""
from __future__ import annotations

import csv
import json
import logging
import time
import zlib
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .core import Instance, ModelConfig, bitstring
from .eamls import EAMLS_SCALE_DEFAULTS, EamlsConfig, run_eamls
from .evolve import GA_SCALE_DEFAULTS, GAConfig, RunReport, run_ga, scale_defaults
from .instgen import mix_seed
from .oracle import DEFAULT_LIMIT, brute_force_optimum, is_optimal
from .stats import aov, gap, optimal_rate, wilcoxon_signed_rank

log = logging.getLogger(__name__)

SOLVERS = ("ga", "eamls", "oracle")
RESULT_COLUMNS = [
    "instance_id", "solver", "model", "run", "seed", "best_objective",
    "time_ms", "evals", "is_optimal", "best_genotype", "status",
]
SUMMARY_COLUMNS = [
    "instance_id", "solver", "model", "runs", "missing", "aov", "gap_pct",
    "optimal_rate", "mean_time_s", "mean_evals", "wilcoxon_w", "wilcoxon_p",
    "significant", "pairing",
]


def cell_seed(base_seed: int, instance_index: int, run: int, solver: str) -> int:
    """Seed of one cell; independent of which other solvers are in the plan."""
    return mix_seed(base_seed, instance_index, run, zlib.crc32(solver.encode()))


def make_config(
    solver: str,
    n: int,
    model: ModelConfig,
    seed: int,
    overrides: dict[str, Any] | None = None,
) -> GAConfig | EamlsConfig:
    """Solver config with per-scale defaults, then ``overrides`` applied."""
    overrides = dict(overrides or {})
    if solver == "ga":
        gens, size = scale_defaults(GA_SCALE_DEFAULTS, n)
        params = dict(generations=gens, pop_size=size)
        params.update(overrides)
        return GAConfig(seed=seed, model=model, **params)
    if solver == "eamls":
        gens, size = scale_defaults(EAMLS_SCALE_DEFAULTS, n)
        params = dict(generations=gens, pop_size=size)
        params.update(overrides)
        return EamlsConfig(seed=seed, model=model, **params)
    raise ValueError(f"unknown solver {solver!r}")


def solve(
    instance: Instance,
    solver: str,
    model: ModelConfig,
    seed: int = 0,
    overrides: dict[str, Any] | None = None,
    oracle_limit: int = DEFAULT_LIMIT,
) -> RunReport:
    if solver == "oracle":
        start = time.perf_counter()
        res = brute_force_optimum(instance, model, limit=oracle_limit)
        return RunReport(
            solver="oracle",
            best_genotype=res.optimum_genotype,
            best_objective=res.optimum_objective,
            m=model.levels(int(res.optimum_genotype.sum())),
            evaluations=res.num_enumerated,
            elapsed=time.perf_counter() - start,
            config={"model": {"name": model.name, "alpha": model.alpha}, "limit": oracle_limit},
        )
    config = make_config(solver, instance.n, model, seed, overrides)
    if solver == "ga":
        return run_ga(instance, config)
    return run_eamls(instance, config)


@dataclass
class BenchmarkPlan:
    instances: list[tuple[str, Instance]]
    solvers: list[str]
    model: ModelConfig
    runs: int = 30
    base_seed: int = 0
    overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
    oracle_limit: int = DEFAULT_LIMIT
    jobs: int = 1

    def __post_init__(self) -> None:
        unknown = set(self.solvers) - set(SOLVERS)
        if unknown:
            raise ValueError(f"unknown solvers: {sorted(unknown)}")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")

    def cells(self) -> list[tuple[int, str, int]]:
        """(instance index, solver, run); the oracle is deterministic and runs once."""
        out = []
        for k in range(len(self.instances)):
            for solver in self.solvers:
                runs = 1 if solver == "oracle" else self.runs
                out.extend((k, solver, r) for r in range(runs))
        return out


@dataclass
class CellResult:
    instance_id: str
    solver: str
    run: int
    seed: int
    report: RunReport | None
    error: str | None = None


def _run_cell(args) -> CellResult:
    instance_id, instance, solver, run, seed, model, overrides, limit = args
    try:
        report = solve(instance, solver, model, seed, overrides, limit)
        return CellResult(instance_id, solver, run, seed, report)
    except Exception as exc:  # recorded per cell; the rest of the plan continues
        return CellResult(instance_id, solver, run, seed, None, f"{type(exc).__name__}: {exc}")


def run_benchmark(plan: BenchmarkPlan) -> list[CellResult]:
    jobs = []
    for k, solver, run in plan.cells():
        instance_id, instance = plan.instances[k]
        seed = 0 if solver == "oracle" else cell_seed(plan.base_seed, k, run, solver)
        jobs.append((instance_id, instance, solver, run, seed, plan.model,
                     plan.overrides.get(solver), plan.oracle_limit))
    if plan.jobs > 1:
        with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            results = list(pool.map(_run_cell, jobs, chunksize=1))
    else:
        results = [_run_cell(j) for j in jobs]
    for res in results:
        if res.error:
            log.warning("cell %s/%s/run %d failed: %s", res.instance_id, res.solver, res.run, res.error)
    return results


def result_rows(results: Iterable[CellResult], model: ModelConfig) -> list[dict[str, str]]:
    results = list(results)
    optimum = {
        r.instance_id: r.report.best_objective
        for r in results
        if r.solver == "oracle" and r.report is not None
    }
    rows = []
    for r in results:
        row = dict.fromkeys(RESULT_COLUMNS, "")
        row.update(instance_id=r.instance_id, solver=r.solver, model=model.name,
                   run=str(r.run), seed=str(r.seed))
        if r.report is None:
            row["status"] = f"error: {r.error}"
        else:
            rep = r.report
            row.update(
                best_objective=repr(rep.best_objective),
                time_ms=str(int(round(rep.elapsed * 1000))),
                evals=str(rep.evaluations),
                best_genotype=bitstring(rep.best_genotype),
                status="ok",
            )
            if r.instance_id in optimum:
                hit = is_optimal(rep.best_objective, optimum[r.instance_id])
                row["is_optimal"] = "true" if hit else "false"
        rows.append(row)
    return rows


def write_csv(rows: list[dict[str, str]], path: str | Path, columns: list[str]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _fmt(x: float | None, spec: str = ".6f") -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return ""
    return format(x, spec)


def summarize(rows: list[dict[str, str]], reference: str = "eamls") -> list[dict[str, str]]:
    """Aggregate raw result rows into one summary row per (instance, solver).

    Gap and the Wilcoxon test compare each solver against ``reference``.
    Runs are paired by run index when both solvers have the same number of
    successful runs on an instance; otherwise per-instance AOVs are paired
    across all instances.
    """
    objs: dict[tuple[str, str], dict[int, float]] = defaultdict(dict)
    info: dict[tuple[str, str], dict[str, Any]] = {}
    instance_order: list[str] = []
    solver_order: list[str] = []
    for row in rows:
        key = (row["instance_id"], row["solver"])
        if row["instance_id"] not in instance_order:
            instance_order.append(row["instance_id"])
        if row["solver"] not in solver_order:
            solver_order.append(row["solver"])
        d = info.setdefault(key, {"model": row["model"], "runs": 0, "missing": 0,
                                  "times": [], "evals": [], "hits": []})
        if row["status"] != "ok":
            d["missing"] += 1
            continue
        d["runs"] += 1
        objs[key][int(row["run"])] = float(row["best_objective"])
        d["times"].append(int(row["time_ms"]) / 1000.0)
        d["evals"].append(int(row["evals"]))
        if row["is_optimal"]:
            d["hits"].append(row["is_optimal"] == "true")

    aovs = {key: aov(list(v.values())) for key, v in objs.items() if v}

    # instance-level pairing, computed once per solver
    instance_level = {}
    for solver in solver_order:
        if solver == reference:
            continue
        shared = [i for i in instance_order if (i, solver) in aovs and (i, reference) in aovs]
        if shared:
            instance_level[solver] = wilcoxon_signed_rank(
                [aovs[(i, solver)] for i in shared], [aovs[(i, reference)] for i in shared]
            )

    out = []
    for inst in instance_order:
        for solver in solver_order:
            key = (inst, solver)
            if key not in info:
                continue
            d = info[key]
            row = dict.fromkeys(SUMMARY_COLUMNS, "")
            row.update(instance_id=inst, solver=solver, model=d["model"],
                       runs=str(d["runs"]), missing=str(d["missing"]))
            if key in aovs:
                row["aov"] = _fmt(aovs[key])
                row["mean_time_s"] = _fmt(float(np.mean(d["times"])), ".3f")
                row["mean_evals"] = _fmt(float(np.mean(d["evals"])), ".1f")
                if d["hits"]:
                    row["optimal_rate"] = _fmt(optimal_rate(d["hits"]), ".2f")
                ref = (inst, reference)
                if ref in aovs:
                    row["gap_pct"] = _fmt(100.0 * gap(aovs[key], aovs[ref]), ".2f")
                if solver != reference and ref in aovs:
                    a, b = objs[key], objs[ref]
                    if sorted(a) == sorted(b):
                        res = wilcoxon_signed_rank([a[r] for r in sorted(a)], [b[r] for r in sorted(b)])
                        row["pairing"] = "run"
                    else:
                        res = instance_level.get(solver)
                        row["pairing"] = "instance"
                    if res is not None:
                        row["wilcoxon_w"] = _fmt(res.statistic, "g")
                        row["wilcoxon_p"] = _fmt(res.p_value, ".6g")
                        row["significant"] = "*" if res.significant else ""
            out.append(row)
    return out


def write_traces(results: Iterable[CellResult], directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for r in results:
        if r.report is None or not r.report.trace:
            continue
        path = directory / f"{r.instance_id}__{r.solver}__run{r.run:03d}.json"
        doc = {"instance_id": r.instance_id, "run": r.run, "seed": r.seed, **r.report.to_dict()}
        path.write_text(json.dumps(doc, indent=1) + "\n")
