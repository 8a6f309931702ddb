"""Command-line entry point: ``hetmmtsp {solve,generate,matrix,compare,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import HetMMError
from ..instgen import generate_suite
from ..oracle import OracleLimit, brute_force_minmax
from ..solver import solve
from .experiments import (
    BASELINES,
    compare_to_reference,
    config_from_options,
    emit_plot_data,
    load_reference,
    run_matrix,
    write_plot_data,
)
from .formats import ResultRow, append_result, read_instance, read_results, save_instance, save_solution

log = logging.getLogger("hetmmtsp")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--construction", choices=["recursive", "balance"], default="recursive")
    p.add_argument("--metric", choices=["insertion", "estimated", "actual"], default="insertion",
                   help="vehicle ranking for switch and swap")
    p.add_argument("--top-vehicles", type=int, default=2, help="receiving vehicles tried per target")
    p.add_argument("--multiswap", choices=["off", "fixed", "variable"], default="fixed")
    p.add_argument("--group-size", type=int, nargs="+", default=[2], metavar="M",
                   help="multi-target group size; several values chain neighborhoods")
    p.add_argument("--candidates", type=int, default=20)
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-limit", type=float, default=3600.0, metavar="SECS")


def _options(args: argparse.Namespace) -> dict:
    return {
        "construction": args.construction,
        "metric": args.metric,
        "top_vehicles": args.top_vehicles,
        "multiswap": args.multiswap,
        "group_size": args.group_size,
        "candidates": args.candidates,
        "runs": args.runs,
        "seed": args.seed,
        "time_limit": args.time_limit,
    }


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    cfg = config_from_options(_options(args))
    res = solve(inst, cfg)
    wall = sum(r.wall for r in res.records)
    print(f"{inst.name}: objective {res.objective:.6f} over {cfg.runs} run(s) in {wall:.2f}s"
          + (" (time limit hit)" if res.truncated else ""))
    for tour in res.solution.tours:
        print(f"  vehicle {tour.vehicle}: time {tour.cost:.6f}, {len(tour.order)} targets")
    if args.out:
        row = ResultRow(inst.name, args.label, res.objective, wall, cfg.rng_seed, cfg.runs,
                        "truncated" if res.truncated else "ok")
        append_result(args.out, row)
    if args.solution:
        save_solution(inst, res.solution, args.solution)
    return 0


def cmd_generate(args) -> int:
    paths = []
    for src in args.bases:
        p = Path(src)
        paths.extend(sorted(p.glob(args.pattern)) if p.is_dir() else [p])
    errors: list[tuple[str, str]] = []
    suite = generate_suite(paths, seed=args.seed, errors=errors)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for inst in suite:
        save_instance(inst, out / f"{inst.name}.txt")
    for name, msg in errors:
        print(f"skipped {name}: {msg}", file=sys.stderr)
    print(f"wrote {len(suite)} instances to {out}")
    return 1 if errors and args.strict else 0


def cmd_matrix(args) -> int:
    grid = json.loads(Path(args.grid).read_text())
    base = Path(args.grid).parent
    instances = [read_instance(base / p) for p in grid["instances"]]
    configs = {label: config_from_options(opts) for label, opts in grid["configs"].items()}
    reference = None
    if args.reference:
        reference = load_reference(args.baseline, None if args.reference == "bundled" else args.reference)
    elif grid.get("baseline_config"):
        reference = grid["baseline_config"]
    result = run_matrix(instances, configs, args.out, base_seed=grid.get("seed", 0),
                        workers=args.workers, baseline=reference)
    if args.summary:
        result.write_summary(args.summary)
    if args.plot_data:
        write_plot_data(emit_plot_data(result.rows, "config", "wall_s"), args.plot_data)
    bad = [r for r in result.rows if not r.ok]
    for s in result.summary.values():
        dev = f", deviation mean {s.deviation.mean:.3f}%" if s.deviation else ""
        print(f"{s.config}: {s.cells} cells, {s.errors} errors, wall mean {s.wall.mean:.2f}s{dev}")
    return 1 if bad and args.strict else 0


def cmd_compare(args) -> int:
    rows = read_results(args.results)
    ref = load_reference(args.baseline, args.reference)
    report = compare_to_reference(rows, ref)
    if args.out:
        report.write_csv(args.out)
    if args.plot_data:
        write_plot_data(emit_plot_data(report.entries, "config", "deviation"), args.plot_data)
    for label, counts in report.by_config().items():
        print(f"{label}: better {counts['better']}, equal {counts['equal']}, worse {counts['worse']}")
    return 1 if args.strict and any(not r.ok for r in rows) else 0


def cmd_oracle(args) -> int:
    inst = read_instance(args.instance)
    res = brute_force_minmax(inst, OracleLimit(args.max_free, args.max_per_vehicle))
    print(f"{inst.name}: optimal objective {res.objective:.6f} ({res.assignments} assignments)")
    for tour in res.solution.tours:
        print(f"  vehicle {tour.vehicle}: {tour.order} time {tour.cost:.6f}")
    if args.solution:
        save_solution(inst, res.solution, args.solution)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hetmmtsp", description="Heterogeneous min-max multi-depot TSP heuristic")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("--instance", required=True)
    _add_solver_flags(p)
    p.add_argument("--out", help="append a result row to this CSV")
    p.add_argument("--label", default="cli", help="config label written to --out")
    p.add_argument("--solution", help="write tours as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("generate", help="build 0/3/5 required-target variants of base instances")
    p.add_argument("bases", nargs="+", help="instance files or directories")
    p.add_argument("--pattern", default="*.txt", help="glob used inside directories")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--strict", action="store_true", help="exit nonzero if any base was skipped")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("matrix", help="run a JSON grid of instances x configs")
    p.add_argument("--grid", required=True)
    p.add_argument("--out", required=True, help="results CSV (appended)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--reference", help="reference CSV path, or 'bundled'")
    p.add_argument("--baseline", choices=BASELINES, default="modified_md")
    p.add_argument("--summary", help="per-config summary CSV")
    p.add_argument("--plot-data", help="per-config wall-time quartiles CSV")
    p.add_argument("--strict", action="store_true", help="exit nonzero on any error row")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("compare", help="better/equal/worse counts against a reference")
    p.add_argument("--results", required=True)
    p.add_argument("--reference", help="reference CSV (default: bundled tables)")
    p.add_argument("--baseline", default="modified_md")
    p.add_argument("--out", help="comparison CSV")
    p.add_argument("--plot-data", help="per-config deviation quartiles CSV")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exact solve of a tiny instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--max-free", type=int, default=10)
    p.add_argument("--max-per-vehicle", type=int, default=13)
    p.add_argument("--solution")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (HetMMError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
