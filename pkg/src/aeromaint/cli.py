"""Command line: ``aeromaint generate|solve|bench``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, fields, replace
from pathlib import Path

from .bench import run_benchmark, run_seed, write_results
from .decoder import schedule_to_dict
from .domain import AVAILABILITY_MODES, catalog_to_csv, load_instance, roster_to_csv, save_instance
from .ea import EaParams, run_ea
from .generator import GeneratorConfig, batch_config, generate_batch, instance_statistics

log = logging.getLogger("aeromaint")


def _generate(args: argparse.Namespace) -> int:
    overrides = {
        "n_aircraft": args.n_aircraft,
        "n_technicians": args.n_technicians,
        "single_shift": args.single_shift,
        "capacity_mode": args.capacity_mode,
        "require_coverage": not args.no_coverage,
    }
    if args.load_band:
        overrides["load_band"] = tuple(args.load_band)
    if args.factor is not None:
        overrides["turnaround_factor"] = args.factor
    if args.batch == "custom":
        if args.factor is None:
            raise SystemExit("--factor is required with --batch custom")
        config = GeneratorConfig(**overrides)
    else:
        config = batch_config(args.batch, **overrides)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    catalog, roster, instances = generate_batch(config, args.count, args.seed)
    (out / "catalog.csv").write_text(catalog_to_csv(catalog))
    (out / "roster.csv").write_text(roster_to_csv(roster))
    for k, inst in enumerate(instances, start=1):
        save_instance(inst, out / f"instance_{k}.csv")
    stats = instance_statistics(instances).as_row()
    with (out / "batch_stats.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["batch", *stats], lineterminator="\n")
        writer.writeheader()
        writer.writerow({"batch": args.batch, **stats})
    print(json.dumps({"batch": args.batch, **stats}))
    return 0


def _ea_params(args: argparse.Namespace, base: EaParams | None = None) -> EaParams:
    params = base or EaParams()
    changes = {
        "pop_size": args.pop,
        "eval_budget": args.evals,
        "ks": args.ks,
        "kr": args.kr,
        "wp_penalty": args.wp,
        "lp_penalty": args.lp,
        "availability": args.availability,
        "shift_limit": args.shift_limit,
    }
    return replace(params, **{k: v for k, v in changes.items() if v is not None})


def _params_from_file(path: str | None) -> EaParams:
    if not path:
        return EaParams()
    data = json.loads(Path(path).read_text())
    known = {f.name for f in fields(EaParams)}
    unknown = set(data) - known
    if unknown:
        raise SystemExit(f"unknown EA parameters in {path}: {sorted(unknown)}")
    return EaParams(**data)


def _solve(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance, args.catalog, args.roster)
    params = _ea_params(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instance_id = Path(args.instance).stem
    records = []
    for r in range(args.runs):
        seed = run_seed(args.seed, instance_id, r)
        result = run_ea(instance, replace(params, seed=seed))
        schedule = result.schedule(instance, params)
        payload = {
            "instance": instance_id,
            "run": r,
            "seed": seed,
            "best_fitness": result.best_fitness,
            "w": result.report.w,
            "l": result.report.l,
            "last_improvement_eval": result.last_improvement_eval,
            "evaluations": result.evaluations,
            "schedule": schedule_to_dict(schedule, instance, params),
        }
        (out / f"run_{r}.json").write_text(json.dumps(payload, indent=1) + "\n")
        records.append(payload)
        log.info("run %d: fitness %s (w=%d, l=%d)", r, result.best_fitness, result.report.w, result.report.l)
    fits = [p["best_fitness"] for p in records]
    row = {
        "instance": instance_id,
        "best": min(fits),
        "avg": round(sum(fits) / len(fits), 2),
        "missing_staff": round(sum(p["w"] for p in records) / len(records), 2),
        "late": round(sum(p["l"] for p in records) / len(records), 2),
        "pct_evals": round(100 * sum(p["last_improvement_eval"] for p in records) / len(records) / params.eval_budget, 1),
    }
    with (out / "summary.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(row), lineterminator="\n")
        writer.writeheader()
        writer.writerow(row)
    print(json.dumps(row))
    return 0


def _bench(args: argparse.Namespace) -> int:
    params = _ea_params(args, _params_from_file(args.params))
    if args.stop_at_optimum:
        params = replace(params, stop_at_optimum=True)
    rows, summary, runs = run_benchmark(args.batch, params, args.repeats, args.seed, args.workers)
    write_results(rows, args.out, summary, runs)
    print(json.dumps(asdict(summary)))
    return 0


def _add_ea_args(p: argparse.ArgumentParser, defaults: bool) -> None:
    d = EaParams() if defaults else None
    p.add_argument("--pop", type=int, default=d and d.pop_size)
    p.add_argument("--evals", type=int, default=d and d.eval_budget)
    p.add_argument("--ks", type=int, default=d and d.ks)
    p.add_argument("--kr", type=int, default=d and d.kr)
    p.add_argument("--wp", type=float, default=d and d.wp_penalty)
    p.add_argument("--lp", type=float, default=d and d.lp_penalty)
    p.add_argument("--availability", choices=AVAILABILITY_MODES, default=None)
    p.add_argument("--shift-limit", choices=("departure", "horizon"), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aeromaint", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a batch of instance CSVs")
    g.add_argument("--batch", choices=("a", "b", "custom"), required=True)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--factor", type=float, default=None, help="turnaround scaling factor")
    g.add_argument("--out", required=True)
    g.add_argument("--n-aircraft", type=int, default=20)
    g.add_argument("--n-technicians", type=int, default=36)
    g.add_argument("--load-band", type=float, nargs=2, metavar=("LOW", "HIGH"))
    g.add_argument("--capacity-mode", choices=("day", "horizon"), default="day")
    g.add_argument("--single-shift", action="store_true", help="capacity from a single shift block per technician")
    g.add_argument("--no-coverage", action="store_true", help="do not require every catalog WP to appear")
    g.set_defaults(func=_generate)

    s = sub.add_parser("solve", help="run the EA on one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--catalog", required=True)
    s.add_argument("--roster", required=True)
    _add_ea_args(s, defaults=True)
    s.add_argument("--runs", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_solve)

    b = sub.add_parser("bench", help="repeated runs over a batch directory")
    b.add_argument("--batch", required=True, help="directory written by 'generate'")
    b.add_argument("--repeats", type=int, default=10)
    b.add_argument("--params", help="JSON file of EA parameters")
    _add_ea_args(b, defaults=False)
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--stop-at-optimum", action="store_true", help="end a run once fitness 0 is found")
    b.add_argument("--out", default="results.csv")
    b.set_defaults(func=_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
