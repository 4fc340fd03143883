"""Repeated seeded runs over a batch directory, aggregated into a results table."""

from __future__ import annotations

import csv
import json
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from statistics import mean
from typing import Sequence

from .domain import ProblemInstance, load_instance
from .ea import EaParams, RunResult, run_ea
from .seeding import derive_seed

log = logging.getLogger(__name__)

RESULTS_HEADER = ["instance", "best", "avg", "missing_staff", "late", "pct_evals"]


@dataclass(frozen=True)
class RunRecord:
    instance_id: str
    run_index: int
    seed: int
    fitness: float
    w: int
    l: int
    last_improvement_eval: int
    evaluations: int
    population_min_trace: list[tuple[int, float]] = field(default_factory=list)

    @classmethod
    def from_result(cls, instance_id: str, run_index: int, seed: int, result: RunResult) -> "RunRecord":
        return cls(
            instance_id,
            run_index,
            seed,
            result.best_fitness,
            result.report.w,
            result.report.l,
            result.last_improvement_eval,
            result.evaluations,
            list(result.population_min_trace),
        )


@dataclass(frozen=True)
class BenchRow:
    instance_id: str
    best: float
    avg: float
    missing_staff: float
    late: float
    pct_evals: float
    error: str | None = None

    def csv_row(self) -> list[object]:
        if self.error:
            return [self.instance_id, "NA", "NA", "NA", "NA", "NA"]
        return [
            self.instance_id,
            _num(self.best),
            f"{self.avg:.1f}",
            f"{self.missing_staff:.1f}",
            f"{self.late:.1f}",
            f"{self.pct_evals:.1f}",
        ]


@dataclass(frozen=True)
class BenchSummary:
    n_instances: int
    n_errors: int
    frac_best_zero: float
    frac_all_runs_zero: float
    mean_avg: float
    mean_pct_evals: float


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else f"{x:.1f}"


def run_seed(master_seed: int, instance_id: str, run_index: int) -> int:
    return derive_seed(master_seed, instance_id, run_index)


def aggregate(instance_id: str, runs: Sequence[RunRecord], eval_budget: int) -> BenchRow:
    return BenchRow(
        instance_id=instance_id,
        best=min(r.fitness for r in runs),
        avg=mean(r.fitness for r in runs),
        missing_staff=mean(r.w for r in runs),
        late=mean(r.l for r in runs),
        pct_evals=mean(100.0 * r.last_improvement_eval / eval_budget for r in runs),
    )


def summarize(rows: Sequence[BenchRow], runs: dict[str, list[RunRecord]]) -> BenchSummary:
    good = [r for r in rows if not r.error]
    n = len(good)
    return BenchSummary(
        n_instances=n,
        n_errors=len(rows) - n,
        frac_best_zero=sum(r.best == 0 for r in good) / n if n else 0.0,
        frac_all_runs_zero=sum(all(x.fitness == 0 for x in runs[r.instance_id]) for r in good) / n if n else 0.0,
        mean_avg=mean(r.avg for r in good) if n else float("nan"),
        mean_pct_evals=mean(r.pct_evals for r in good) if n else float("nan"),
    )


def _instance_key(path: Path) -> tuple:
    m = re.search(r"(\d+)$", path.stem)
    return (0, int(m.group(1)), path.stem) if m else (1, 0, path.stem)


def batch_files(batch_dir: str | Path) -> list[Path]:
    return sorted(Path(batch_dir).glob("instance_*.csv"), key=_instance_key)


def _one_run(job: tuple[ProblemInstance, str, int, int, EaParams]) -> RunRecord:
    instance, instance_id, run_index, seed, params = job
    result = run_ea(instance, replace(params, seed=seed))
    return RunRecord.from_result(instance_id, run_index, seed, result)


def run_instances(
    instances: Sequence[tuple[str, ProblemInstance]],
    params: EaParams,
    repeats: int = 10,
    master_seed: int = 0,
    workers: int = 1,
) -> tuple[list[BenchRow], dict[str, list[RunRecord]]]:
    """Run ``repeats`` seeded runs per instance; results ordered by (instance, run)."""
    jobs = [
        (inst, iid, r, run_seed(master_seed, iid, r), params)
        for iid, inst in instances
        for r in range(repeats)
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_one_run, jobs))
    else:
        records = [_one_run(job) for job in jobs]
    by_instance: dict[str, list[RunRecord]] = {iid: [] for iid, _ in instances}
    for rec in records:
        by_instance[rec.instance_id].append(rec)
    rows = [aggregate(iid, by_instance[iid], params.eval_budget) for iid, _ in instances]
    return rows, by_instance


def run_benchmark(
    batch_dir: str | Path,
    params: EaParams,
    repeats: int = 10,
    master_seed: int = 0,
    workers: int = 1,
) -> tuple[list[BenchRow], BenchSummary, dict[str, list[RunRecord]]]:
    batch_dir = Path(batch_dir)
    loaded: list[tuple[str, ProblemInstance]] = []
    errors: dict[str, str] = {}
    order = []
    for path in batch_files(batch_dir):
        order.append(path.stem)
        try:
            loaded.append((path.stem, load_instance(path, batch_dir / "catalog.csv", batch_dir / "roster.csv")))
        except Exception as exc:  # noqa: BLE001 - any unreadable file becomes an error row
            log.error("skipping %s: %s", path.name, exc)
            errors[path.stem] = f"{type(exc).__name__}: {exc}"
    rows_ok, runs = run_instances(loaded, params, repeats, master_seed, workers)
    by_id = {r.instance_id: r for r in rows_ok}
    nan = float("nan")
    rows = [by_id.get(iid) or BenchRow(iid, nan, nan, nan, nan, nan, error=errors[iid]) for iid in order]
    return rows, summarize(rows, runs), runs


def write_results(
    rows: Sequence[BenchRow],
    out: str | Path,
    summary: BenchSummary | None = None,
    runs: dict[str, list[RunRecord]] | None = None,
) -> None:
    """``results.csv`` plus optional ``<stem>.summary.json`` and ``<stem>.runs.jsonl`` beside it."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_HEADER)
        writer.writerows(r.csv_row() for r in rows)
    if summary is not None:
        payload = asdict(summary)
        payload["errors"] = {r.instance_id: r.error for r in rows if r.error}
        out.with_suffix(".summary.json").write_text(json.dumps(payload, indent=1) + "\n")
    if runs is not None:
        with out.with_suffix(".runs.jsonl").open("w") as fh:
            for iid in runs:
                for rec in runs[iid]:
                    fh.write(json.dumps(asdict(rec)) + "\n")
