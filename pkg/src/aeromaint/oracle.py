"""Exhaustive baseline solver for micro-instances.

Searches the timetable space directly, independent of the chromosome
decoder: work orders are placed one at a time in non-decreasing start order,
each at an event point (its ready time, a booking end, or a shift start) with
any subset of its slots staffed by free, qualified, distinct technicians.
Every semi-active schedule is reachable this way, so the minimum found is
the true optimum of ``w * wp + l * lp`` over that space.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .chromosome import Chromosome, Gene
from .decoder import Booking, DecoderOptions, Schedule, check_schedule, evaluate
from .domain import ProblemInstance

MAX_GENES = 6
MAX_TECHNICIANS = 5


class OracleSizeError(ValueError):
    """The instance is too large for exhaustive search."""


@dataclass(frozen=True)
class WitnessEntry:
    aircraft_ref: int
    wp_id: int
    occurrence: int
    wo_index: int
    start: int
    techs: tuple[int | None, ...]  # per slot; None = uncovered


@dataclass
class OracleResult:
    optimal_penalty: float
    w: int
    l: int
    witness: list[WitnessEntry]
    nodes: int = 0

    def schedule(self, instance: ProblemInstance, availability: str = "continuous") -> Schedule:
        sched = Schedule(availability=availability)
        for e in self.witness:
            d = instance.wp(e.wp_id).work_orders[e.wo_index].duration
            sched.wo_times[(e.aircraft_ref, e.wp_id, e.occurrence, e.wo_index)] = (e.start, e.start + d)
            for j, t in enumerate(e.techs):
                if t is None:
                    sched.uncovered.append((e.aircraft_ref, e.wp_id, e.occurrence, e.wo_index, j))
                else:
                    sched.bookings.setdefault(t, []).append(
                        Booking(t, e.start, e.start + d, e.aircraft_ref, e.wp_id, e.occurrence, e.wo_index, j)
                    )
        for lane in sched.bookings.values():
            lane.sort(key=lambda b: b.start)
        return sched


def brute_force_solve(instance: ProblemInstance, params=None) -> OracleResult:
    wp_pen = getattr(params, "wp_penalty", 1)
    lp_pen = getattr(params, "lp_penalty", 10)
    availability = getattr(params, "availability", DecoderOptions().availability)
    keys = instance.gene_keys
    if len(keys) > MAX_GENES or len(instance.roster) > MAX_TECHNICIANS:
        raise OracleSizeError(
            f"oracle limited to {MAX_GENES} genes and {MAX_TECHNICIANS} technicians "
            f"(got {len(keys)} and {len(instance.roster)})"
        )

    horizon = instance.horizon_end
    windows = {t.tech_id: t.windows(horizon, availability) for t in instance.roster}
    window_starts = sorted({ws for w in windows.values() for ws, _ in w})
    n_ac = len(instance.aircraft)
    departure = [ac.departure for ac in instance.aircraft]
    wos_of = {wp.wp_id: wp.work_orders for wp in instance.catalog}
    qualified = {
        wp.wp_id: [[instance.qualified(s) for s in wo.slots] for wo in wp.work_orders] for wp in instance.catalog
    }

    # per aircraft: remaining WP occurrences (wp_id, occ)
    remaining = [sorted((wp, occ) for a2, wp, occ in keys if a2 == a) for a in range(n_ac)]
    work_left = [sum(wos_of[wp][k].duration for wp, _ in remaining[a] for k in range(len(wos_of[wp]))) for a in range(n_ac)]
    ready = [ac.landing for ac in instance.aircraft]
    current: list[tuple[int, int, int] | None] = [None] * n_ac  # (wp_id, occ, next wo index)
    busy: dict[int, list[tuple[int, int]]] = {t.tech_id: [] for t in instance.roster}
    trail: list[WitnessEntry] = []

    best = {"value": float("inf"), "w": 0, "l": 0, "witness": []}
    nodes = 0

    def free(t: int, s: int, e: int) -> bool:
        if not any(ws <= s and e <= we for ws, we in windows[t]):
            return False
        return all(e <= bs or s >= be for bs, be in busy[t])

    def staffings(slot_sets: list[tuple[int, ...]], s: int, e: int) -> Iterator[tuple[int | None, ...]]:
        options = [[t for t in q if free(t, s, e)] + [None] for q in slot_sets]
        for combo in itertools.product(*options):
            staffed = [t for t in combo if t is not None]
            if len(staffed) == len(set(staffed)):
                yield combo

    def certain_late() -> int:
        return sum(1 for a in range(n_ac) if ready[a] + work_left[a] > departure[a])

    def dfs(w: int, last_start: int) -> None:
        nonlocal nodes
        nodes += 1
        bound = w * wp_pen + certain_late() * lp_pen
        if bound >= best["value"]:
            return
        if not any(remaining[a] or current[a] for a in range(n_ac)):
            late = sum(1 for a in range(n_ac) if ready[a] > departure[a])
            best.update(value=w * wp_pen + late * lp_pen, w=w, l=late, witness=list(trail))
            return
        points = sorted({e for lane in busy.values() for _, e in lane} | set(window_starts))
        for a in range(n_ac):
            if current[a] is not None:
                choices = [current[a]]
            else:
                # occurrences of one wp_id are interchangeable: only try the lowest
                seen = set()
                choices = []
                for wp_id, occ in remaining[a]:
                    if wp_id not in seen:
                        seen.add(wp_id)
                        choices.append((wp_id, occ, 0))
            for wp_id, occ, k in choices:
                wo = wos_of[wp_id][k]
                d = wo.duration
                earliest = max(ready[a], last_start)
                cands = sorted(
                    c for c in {ready[a], *points} if c >= earliest and (c == ready[a] or c + d <= horizon)
                )
                # apply the placement
                saved = (ready[a], current[a], work_left[a])
                if k == 0:
                    remaining[a].remove((wp_id, occ))
                for ci, c in enumerate(cands):
                    for combo in staffings(qualified[wp_id][k], c, c + d):
                        missing = sum(1 for t in combo if t is None)
                        if missing == len(combo) and ci > 0:
                            continue  # an unstaffed WO is never better placed later
                        for t in combo:
                            if t is not None:
                                busy[t].append((c, c + d))
                        ready[a] = c + d
                        work_left[a] = saved[2] - d
                        nxt = k + 1
                        current[a] = (wp_id, occ, nxt) if nxt < len(wos_of[wp_id]) else None
                        trail.append(WitnessEntry(a, wp_id, occ, k, c, combo))
                        dfs(w + missing, c)
                        trail.pop()
                        for t in combo:
                            if t is not None:
                                busy[t].pop()
                        ready[a], current[a], work_left[a] = saved
                if k == 0:
                    remaining[a].append((wp_id, occ))
                    remaining[a].sort()

    dfs(0, min((ac.landing for ac in instance.aircraft), default=0))
    return OracleResult(best["value"], best["w"], best["l"], best["witness"], nodes)


def verify_witness(result: OracleResult, instance: ProblemInstance, params=None) -> list[str]:
    """Problems with the witness: schedule violations or a penalty mismatch."""
    availability = getattr(params, "availability", DecoderOptions().availability)
    sched = result.schedule(instance, availability)
    problems = check_schedule(sched, instance)
    report = evaluate(sched, instance, params)
    if report.fitness != result.optimal_penalty:
        problems.append(f"witness evaluates to {report.fitness}, oracle claims {result.optimal_penalty}")
    return problems


def enumerate_chromosomes(instance: ProblemInstance, limit: int = 2_000_000) -> Iterator[Chromosome]:
    """Every distinct chromosome: gene orderings times qualified staff allocations."""
    keys = list(instance.gene_keys)
    per_gene = []
    total = 1
    for a, wp_id, occ in keys:
        slot_sets = [instance.qualified(s) for wo in instance.wp(wp_id).work_orders for s in wo.slots]
        allocs = [Gene(a, wp_id, occ, techs) for techs in itertools.product(*slot_sets)]
        per_gene.append(allocs)
        total *= len(allocs)
    n_perm = 1
    for i in range(2, len(keys) + 1):
        n_perm *= i
    if total * n_perm > limit:
        raise OracleSizeError(f"{total * n_perm} chromosomes exceed the enumeration limit {limit}")
    for order in itertools.permutations(range(len(keys))):
        for genes in itertools.product(*(per_gene[i] for i in order)):
            yield list(genes)
