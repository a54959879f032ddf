"""Command-line front end: ``rflp gen|solve|bench|stats``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .bench import (
    RESULT_COLUMNS,
    SOLVERS,
    SUMMARY_COLUMNS,
    BenchmarkPlan,
    read_csv,
    result_rows,
    run_benchmark,
    solve,
    summarize,
    write_csv,
    write_traces,
)
from .core import ModelConfig
from .instgen import GenParams, generate_instance, mix_seed, read_instance, write_instance
from .oracle import DEFAULT_LIMIT

log = logging.getLogger("rflp")

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def generated_instances(n: int, count: int, seed: int):
    """``count`` instances of size ``n`` with ids ``<n>-<k>``; seeds match ``gen``."""
    for k in range(count):
        s = mix_seed(seed, k)
        yield f"{n}-{k + 1}", s, generate_instance(GenParams(n=n, seed=s))


def _overrides(args) -> dict[str, dict]:
    out: dict[str, dict] = {"ga": {}, "eamls": {}}
    shared = {"mutation_rate": args.mutation_rate}
    for solver in ("ga", "eamls"):
        for name in ("generations", "pop_size"):
            value = getattr(args, f"{solver}_{name}")
            if value is not None:
                out[solver][name] = value
        out[solver].update({k: v for k, v in shared.items() if v is not None})
    for name in ("crossover_rate",):
        if getattr(args, name) is not None:
            out["ga"][name] = getattr(args, name)
    for name in ("ls_count", "l3_threshold", "pop_step"):
        if getattr(args, name) is not None:
            out["eamls"][name] = getattr(args, name)
    return out


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", choices=["m2", "msum"], default="msum",
                   help="m2: two facilities per customer; msum: all selected facilities")
    p.add_argument("--alpha", type=float, default=1.0, help="weight of the transport term")
    p.add_argument("--oracle-limit", type=int, default=DEFAULT_LIMIT,
                   help="largest n the exhaustive oracle accepts")
    g = p.add_argument_group("solver parameters (defaults depend on instance size)")
    for solver in ("ga", "eamls"):
        g.add_argument(f"--{solver}-generations", type=int)
        g.add_argument(f"--{solver}-pop-size", type=int)
    g.add_argument("--mutation-rate", type=float)
    g.add_argument("--crossover-rate", type=float)
    g.add_argument("--ls-count", type=int)
    g.add_argument("--l3-threshold", type=float)
    g.add_argument("--pop-step", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rflp", description="Reliable facility location solvers and benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate random instance files")
    p.add_argument("--n", type=int, required=True, help="number of nodes")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--prefix", default="inst")

    p = sub.add_parser("solve", help="solve one instance and print a JSON report")
    p.add_argument("--instance", required=True, help="instance file, or - for stdin")
    p.add_argument("--solver", choices=SOLVERS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="report path (default: stdout)")
    p.add_argument("--emit-trace", action="store_true", help="include the per-generation trace")
    _add_model_flags(p)

    p = sub.add_parser("bench", help="run solvers repeatedly and write CSV results")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--instances", nargs="+", help="instance files")
    src.add_argument("--n", type=int, help="generate instances of this size instead")
    p.add_argument("--count", type=int, default=8, help="instances to generate with --n")
    p.add_argument("--instance-seed", type=int, default=0, help="seed for generated instances")
    p.add_argument("--solvers", default="ga,eamls,oracle", help="comma-separated solver list")
    p.add_argument("--runs", type=int, default=30)
    p.add_argument("--seed", type=int, default=0, help="base seed for per-run seeds")
    p.add_argument("--reference", default="eamls", help="solver that Gap and Wilcoxon compare to")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--emit-trace", action="store_true", help="write per-run trace files")
    _add_model_flags(p)

    p = sub.add_parser("stats", help="summarise a results CSV")
    p.add_argument("results")
    p.add_argument("--reference", default="eamls")
    p.add_argument("--out", help="summary CSV path (default: stdout)")
    return parser


def cmd_gen(args) -> int:
    if args.n < 1 or args.count < 1:
        raise UsageError("--n and --count must be positive")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k, (inst_id, seed, inst) in enumerate(generated_instances(args.n, args.count, args.seed)):
        path = out / f"{args.prefix}-{inst_id}.json"
        write_instance(inst, path)
        print(f"{path}\t{seed}")
    return 0


def cmd_solve(args) -> int:
    instance = read_instance(args.instance)
    model = ModelConfig.from_name(args.model, args.alpha)
    report = solve(instance, args.solver, model, args.seed, _overrides(args).get(args.solver),
                   args.oracle_limit)
    doc = {"instance": args.instance, "n": instance.n, "seed": args.seed,
           **report.to_dict(include_trace=args.emit_trace)}
    if not args.emit_trace and report.trace:
        doc["best_trace"] = [t.best_objective for t in report.trace]
    text = json.dumps(doc, indent=1) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bench(args) -> int:
    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    if args.instances:
        instances = [(Path(p).stem, read_instance(p)) for p in args.instances]
    else:
        if args.n < 1 or args.count < 1:
            raise UsageError("--n and --count must be positive")
        instances = [(i, inst) for i, _, inst in
                     generated_instances(args.n, args.count, args.instance_seed)]
    model = ModelConfig.from_name(args.model, args.alpha)
    try:
        plan = BenchmarkPlan(instances=instances, solvers=solvers, model=model, runs=args.runs,
                             base_seed=args.seed, overrides=_overrides(args),
                             oracle_limit=args.oracle_limit, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    results = run_benchmark(plan)
    rows = result_rows(results, model)
    write_csv(rows, out / "results.csv", RESULT_COLUMNS)
    summary = summarize(rows, args.reference)
    write_csv(summary, out / "summary.csv", SUMMARY_COLUMNS)
    if args.emit_trace:
        write_traces(results, out / "traces")
    failed = sum(r.error is not None for r in results)
    with open(out / "bench.log", "a") as fh:
        fh.write(f"{started} .. {time.strftime('%Y-%m-%dT%H:%M:%S')} "
                 f"cells={len(results)} failed={failed} argv={sys.argv[1:]}\n")
    _print_summary(summary)
    return 0


def _print_summary(summary: list[dict[str, str]]) -> None:
    cols = ["instance_id", "solver", "aov", "gap_pct", "optimal_rate", "mean_time_s", "wilcoxon_p"]
    print("\t".join(cols))
    for row in summary:
        aov = row["aov"] + (row["significant"] or "")
        print("\t".join([row["instance_id"], row["solver"], aov] + [row[c] for c in cols[3:]]))


def cmd_stats(args) -> int:
    rows = read_csv(args.results)
    summary = summarize(rows, args.reference)
    if args.out:
        write_csv(summary, args.out, SUMMARY_COLUMNS)
    else:
        _print_summary(summary)
    return 0


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "bench": cmd_bench, "stats": cmd_stats}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rflp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"rflp: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
