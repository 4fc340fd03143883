"""Chromosome decoding, penalty evaluation, schedule checking and export.

Decoding places work packages in chromosome order. A WP starts at the
aircraft's landing (first WP for that aircraft) or at the finish of the
aircraft's previous WP; each WO starts when its predecessor finishes. Staff
entries are booked one by one. A busy technician triggers a forward search
for a later common start at which the technician and every technician
already committed to the same WO are free; if none exists before the horizon
end, the slot is left uncovered.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

from .chromosome import Gene
from .domain import AVAILABILITY_MODES, ProblemInstance

SlotLocator = tuple[int, int, int, int, int]  # aircraft, wp_id, occurrence, wo_index, slot_index
WoKey = tuple[int, int, int, int]  # aircraft, wp_id, occurrence, wo_index


@dataclass(frozen=True)
class DecoderOptions:
    # "rotating", "single" or "continuous"; see Technician.windows
    availability: str = "continuous"
    # allow the forward search to move a WO into a later availability block
    cross_shift_blocks: bool = True
    # latest allowed end of a shifted WO: the aircraft's "departure" or the instance "horizon"
    shift_limit: str = "departure"

    def __post_init__(self) -> None:
        if self.availability not in AVAILABILITY_MODES:
            raise ValueError(f"unknown availability mode {self.availability!r}")
        if self.shift_limit not in ("departure", "horizon"):
            raise ValueError(f"unknown shift_limit {self.shift_limit!r}")


DEFAULT_OPTIONS = DecoderOptions()


@dataclass(frozen=True)
class Booking:
    tech_id: int
    start: int
    end: int
    aircraft_ref: int
    wp_id: int
    occurrence: int
    wo_index: int
    slot_index: int

    @property
    def wo_key(self) -> WoKey:
        return (self.aircraft_ref, self.wp_id, self.occurrence, self.wo_index)


@dataclass
class Schedule:
    wo_times: dict[WoKey, tuple[int, int]] = field(default_factory=dict)
    bookings: dict[int, list[Booking]] = field(default_factory=dict)
    uncovered: list[SlotLocator] = field(default_factory=list)
    availability: str = "continuous"

    def aircraft_finish(self) -> dict[int, int]:
        finish: dict[int, int] = {}
        for (a, _, _, _), (_, end) in self.wo_times.items():
            if end > finish.get(a, -1):
                finish[a] = end
        return finish


@dataclass(frozen=True)
class FitnessReport:
    w: int
    l: int
    fitness: float

    @classmethod
    def from_counts(cls, w: int, l: int, wp_penalty: float = 1, lp_penalty: float = 10) -> "FitnessReport":
        return cls(w, l, w * wp_penalty + l * lp_penalty)


class _Tables:
    """Per-instance lookup tables; built once and cached on the instance."""

    def __init__(self, instance: ProblemInstance, options: DecoderOptions):
        self.horizon_end = instance.horizon_end
        ids = [t.tech_id for t in instance.roster]
        self.n_tech = max(ids, default=-1) + 1
        self.windows: list[list[tuple[int, int]]] = [[] for _ in range(self.n_tech)]
        for t in instance.roster:
            self.windows[t.tech_id] = t.windows(self.horizon_end, options.availability)
        self.landing = [ac.landing for ac in instance.aircraft]
        self.departure = [ac.departure for ac in instance.aircraft]
        self.wos = {
            wp.wp_id: [(wo.duration, len(wo.slots)) for wo in wp.work_orders] for wp in instance.catalog
        }


def _tables(instance: ProblemInstance, options: DecoderOptions) -> _Tables:
    cache = instance.__dict__.setdefault("_decoder_tables", {})
    tab = cache.get(options)
    if tab is None:
        tab = cache[options] = _Tables(instance, options)
    return tab


def _run(chromosome: Sequence[Gene], instance: ProblemInstance, options: DecoderOptions, record: bool):
    tab = _tables(instance, options)
    windows = tab.windows
    horizon = tab.horizon_end
    cross = options.cross_shift_blocks
    by_departure = options.shift_limit == "departure"
    starts: list[list[int]] = [[] for _ in range(tab.n_tech)]
    ends: list[list[int]] = [[] for _ in range(tab.n_tech)]
    finish: dict[int, int] = {}
    uncovered = 0
    schedule = Schedule(availability=options.availability) if record else None

    def free(t: int, s: int, e: int) -> bool:
        for ws, we in windows[t]:
            if ws <= s and e <= we:
                break
        else:
            return False
        te = ends[t]
        i = bisect_right(te, s)
        return i == len(te) or starts[t][i] >= e

    def book(t: int, s: int, e: int) -> None:
        i = bisect_right(ends[t], s)
        starts[t].insert(i, s)
        ends[t].insert(i, e)

    def unbook(t: int, s: int) -> None:
        i = starts[t].index(s)
        del starts[t][i]
        del ends[t][i]

    def search(techs: list[int], s: int, d: int, limit: int) -> int | None:
        points = set()
        for t in techs:
            te = ends[t]
            points.update(te[bisect_right(te, s):])
            points.update(ws for ws, _ in windows[t] if ws > s)
        for c in sorted(points):
            if c + d > limit:
                return None
            if all(free(t, c, c + d) for t in techs):
                return c
        return None

    for gi, gene in enumerate(chromosome):
        a = gene.aircraft_ref
        t0 = finish.get(a, tab.landing[a])
        techs = gene.techs
        pos = 0
        for k, (d, n_slots) in enumerate(tab.wos[gene.wp_id]):
            s = t0
            booked: list[int] = []
            booked_slots: list[int] = []
            for j in range(n_slots):
                t = techs[pos + j]
                if t in booked:
                    ok = False
                elif free(t, s, s + d):
                    book(t, s, s + d)
                    ok = True
                else:
                    limit = tab.departure[a] if by_departure else horizon
                    if not cross:
                        limit = min(limit, next((we for _, we in windows[t] if we > s), s))
                    for b in booked:
                        unbook(b, s)
                    c = search(booked + [t], s, d, limit)
                    if c is not None:
                        s = c
                        book(t, s, s + d)
                    for b in booked:
                        book(b, s, s + d)
                    ok = c is not None
                if ok:
                    booked.append(t)
                    booked_slots.append(j)
                else:
                    uncovered += 1
                    if record:
                        schedule.uncovered.append((a, gene.wp_id, gene.occurrence, k, j))
            pos += n_slots
            t0 = s + d
            if record:
                schedule.wo_times[(a, gene.wp_id, gene.occurrence, k)] = (s, t0)
                for t, j in zip(booked, booked_slots):
                    schedule.bookings.setdefault(t, []).append(
                        Booking(t, s, t0, a, gene.wp_id, gene.occurrence, k, j)
                    )
        finish[a] = t0

    departure = tab.departure
    late = sum(1 for a, f in finish.items() if f > departure[a])
    if record:
        for lane in schedule.bookings.values():
            lane.sort(key=lambda b: (b.start, b.end))
        schedule.bookings = dict(sorted(schedule.bookings.items()))
    return uncovered, late, schedule


def decode(chromosome: Sequence[Gene], instance: ProblemInstance, options: DecoderOptions = DEFAULT_OPTIONS) -> Schedule:
    return _run(chromosome, instance, options, record=True)[2]


def penalty_counts(
    chromosome: Sequence[Gene], instance: ProblemInstance, options: DecoderOptions = DEFAULT_OPTIONS
) -> tuple[int, int]:
    """(uncovered slots, late aircraft) without materialising the schedule."""
    w, l, _ = _run(chromosome, instance, options, record=False)
    return w, l


def evaluate(schedule: Schedule, instance: ProblemInstance, params=None) -> FitnessReport:
    """Penalty fitness ``w * wp_penalty + l * lp_penalty`` (lower is better)."""
    wp_penalty = getattr(params, "wp_penalty", 1)
    lp_penalty = getattr(params, "lp_penalty", 10)
    finish = schedule.aircraft_finish()
    late = sum(1 for a, f in finish.items() if f > instance.aircraft[a].departure)
    return FitnessReport.from_counts(len(schedule.uncovered), late, wp_penalty, lp_penalty)


# --------------------------------------------------------------------------- checking


def check_schedule(schedule: Schedule, instance: ProblemInstance) -> list[str]:
    """Re-verify schedule invariants independently of the decoder."""
    problems = []
    horizon = instance.horizon_end
    per_occurrence: dict[tuple[int, int, int], list[tuple[int, int, int]]] = {}
    for (a, wp_id, occ, k), (start, end) in schedule.wo_times.items():
        if not 0 <= a < len(instance.aircraft) or wp_id not in instance.wp_by_id:
            problems.append(f"unknown work order a{a}.wp{wp_id}.wo{k}")
            continue
        wos = instance.wp(wp_id).work_orders
        if not 0 <= k < len(wos):
            problems.append(f"a{a}.wp{wp_id}#{occ}: no work order {k}")
            continue
        if end - start != wos[k].duration:
            problems.append(f"a{a}.wp{wp_id}#{occ}.wo{k}: duration {end - start} != {wos[k].duration}")
        if start < instance.aircraft[a].landing:
            problems.append(f"a{a}.wp{wp_id}#{occ}.wo{k}: starts before landing")
        per_occurrence.setdefault((a, wp_id, occ), []).append((k, start, end))
    for (a, wp_id, occ), rows in per_occurrence.items():
        rows.sort()
        for (k0, _, e0), (k1, s1, _) in zip(rows, rows[1:]):
            if s1 < e0:
                problems.append(f"sequencing: a{a}.wp{wp_id}#{occ}.wo{k1} starts before wo{k0} ends")

    for tech_id, lane in schedule.bookings.items():
        tech = instance.tech_by_id.get(tech_id)
        if tech is None:
            problems.append(f"booking for unknown technician {tech_id}")
            continue
        windows = tech.windows(horizon, schedule.availability)
        ordered = sorted(lane, key=lambda b: (b.start, b.end))
        for prev, cur in zip(ordered, ordered[1:]):
            if cur.start < prev.end:
                problems.append(f"double-booking: tech {tech_id} at [{cur.start},{prev.end})")
        for b in ordered:
            if not b.start < b.end:
                problems.append(f"tech {tech_id}: empty booking at {b.start}")
            if not any(ws <= b.start and b.end <= we for ws, we in windows):
                problems.append(f"shift: tech {tech_id} booked [{b.start},{b.end}) outside availability")
            times = schedule.wo_times.get(b.wo_key)
            if times != (b.start, b.end):
                problems.append(f"tech {tech_id}: booking [{b.start},{b.end}) does not match its WO times {times}")
            elif b.wp_id in instance.wp_by_id:
                slots = instance.wp(b.wp_id).work_orders[b.wo_index].slots
                if not 0 <= b.slot_index < len(slots) or tech.cert not in slots[b.slot_index].allowed_certs:
                    problems.append(f"tech {tech_id} not qualified for slot {b.slot_index} of {b.wo_key}")
    return problems


# --------------------------------------------------------------------------- export


def schedule_to_dict(schedule: Schedule, instance: ProblemInstance, params=None) -> dict:
    report = evaluate(schedule, instance, params)
    by_wo: dict[WoKey, list[Booking]] = {}
    for lane in schedule.bookings.values():
        for b in lane:
            by_wo.setdefault(b.wo_key, []).append(b)
    missing: dict[WoKey, int] = {}
    for a, wp_id, occ, k, _ in schedule.uncovered:
        missing[(a, wp_id, occ, k)] = missing.get((a, wp_id, occ, k), 0) + 1

    occurrences: dict[int, dict[tuple[int, int], list]] = {}
    for key in sorted(schedule.wo_times, key=lambda k: (k[0], schedule.wo_times[k][0], k[1], k[2], k[3])):
        a, wp_id, occ, k = key
        start, end = schedule.wo_times[key]
        staff = sorted(by_wo.get(key, []), key=lambda b: b.slot_index)
        occurrences.setdefault(a, {}).setdefault((wp_id, occ), []).append(
            {
                "wo": k,
                "start": start,
                "end": end,
                "techs": [b.tech_id for b in staff],
                "uncovered_slots": missing.get(key, 0),
            }
        )
    aircraft = []
    for a, ac in enumerate(instance.aircraft):
        wps = [
            {"wp_id": wp_id, "occurrence": occ, "wos": wos}
            for (wp_id, occ), wos in occurrences.get(a, {}).items()
        ]
        aircraft.append(
            {"serial": ac.serial, "landing": ac.landing, "departure": ac.departure, "wps": wps}
        )
    technicians = [
        {
            "tech_id": tech_id,
            "bookings": [
                {
                    "start": b.start,
                    "end": b.end,
                    "aircraft": b.aircraft_ref,
                    "wo": {"wp_id": b.wp_id, "occurrence": b.occurrence, "wo_index": b.wo_index, "slot": b.slot_index},
                }
                for b in lane
            ],
        }
        for tech_id, lane in schedule.bookings.items()
    ]
    return {
        "instance_seed": instance.seed,
        "fitness": report.fitness,
        "w": report.w,
        "l": report.l,
        "availability": schedule.availability,
        "aircraft": aircraft,
        "technicians": technicians,
    }


def schedule_from_dict(data: dict) -> Schedule:
    schedule = Schedule(availability=data.get("availability", "continuous"))
    for a, ac in enumerate(data.get("aircraft", [])):
        for wp in ac["wps"]:
            for wo in wp["wos"]:
                schedule.wo_times[(a, wp["wp_id"], wp["occurrence"], wo["wo"])] = (wo["start"], wo["end"])
                # slot indices of uncovered entries are not serialised; keep counts only
                for _ in range(wo["uncovered_slots"]):
                    schedule.uncovered.append((a, wp["wp_id"], wp["occurrence"], wo["wo"], -1))
    for tech in data.get("technicians", []):
        lane = []
        for b in tech["bookings"]:
            loc = b["wo"]
            lane.append(
                Booking(tech["tech_id"], b["start"], b["end"], b["aircraft"], loc["wp_id"], loc["occurrence"], loc["wo_index"], loc["slot"])
            )
        schedule.bookings[tech["tech_id"]] = lane
    return schedule


def _gantt(schedule: Schedule, instance: ProblemInstance, minutes_per_char: int) -> str:
    if not schedule.wo_times:
        return "(empty schedule)\n"
    origin = min(s for s, _ in schedule.wo_times.values())
    label_w = 12

    def lane(label: str, spans: list[tuple[int, int, str]]) -> str:
        width = max((e - origin + minutes_per_char - 1) // minutes_per_char for _, e, _ in spans)
        row = [" "] * width
        for s, e, ch in spans:
            lo = (s - origin) // minutes_per_char
            hi = lo + max(1, (e - s) // minutes_per_char)
            for x in range(lo, min(hi, width)):
                row[x] = ch
        return f"{label:<{label_w}}|{''.join(row).rstrip()}"

    lines = [f"origin={origin} min, 1 char = {minutes_per_char} min", "aircraft:"]
    spans_by_ac: dict[int, list[tuple[int, int, str]]] = {}
    for (a, wp_id, _, _), (s, e) in sorted(schedule.wo_times.items(), key=lambda kv: kv[1]):
        spans_by_ac.setdefault(a, []).append((s, e, chr(ord("A") + wp_id % 26)))
    for a, spans in sorted(spans_by_ac.items()):
        lines.append(lane(instance.aircraft[a].serial, spans))
    lines.append("technicians:")
    for tech_id, bookings in schedule.bookings.items():
        if bookings:
            lines.append(lane(f"T{tech_id}", [(b.start, b.end, "#") for b in bookings]))
    return "\n".join(lines) + "\n"


def export_schedule(
    schedule: Schedule, instance: ProblemInstance, format: str = "json", *, params=None, minutes_per_char: int = 10
) -> bytes:
    """Render as ``json`` or a plain-text ``gantt``."""
    if format == "json":
        return json.dumps(schedule_to_dict(schedule, instance, params), indent=1).encode()
    if format == "gantt":
        return _gantt(schedule, instance, minutes_per_char).encode()
    raise ValueError(f"unknown export format {format!r} (expected 'json' or 'gantt')")
