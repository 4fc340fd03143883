"""Constraint-compliant problem instance generation.

An instance is built attempt by attempt: every aircraft gets a landing time on
the base day and a WP list (coverage pick first, then stochastic additions);
its turnaround is the scaled WP duration. Attempts are discarded when an
aircraft exceeds the turnaround cap, when some catalog WP is unused, or when
total man-hours fall outside the load band.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field, replace
from datetime import date, timedelta
from typing import Sequence

from .domain import (
    CERT_ORDER,
    DAY_MINUTES,
    MAX_TURNAROUND,
    MAX_WP_DURATION,
    MIN_WP_DURATION,
    SHIFT_LENGTH,
    SHIFT_PATTERNS,
    Aircraft,
    Certification,
    ProblemInstance,
    StaffSlotRequirement,
    Technician,
    WorkOrderDef,
    WorkPackageDef,
    total_man_hours,
    total_wp_duration,
)
from .seeding import derive_seed

B1T, B2T, B1E, B2E = CERT_ORDER

EPOCH = date(2025, 1, 1)
DEFAULT_CERT_MIX = (12, 10, 8, 6)
MIN_WO_DURATION = 15
MAX_WOS_PER_WP = 4

# (weight, candidate cert sets); a candidate is drawn uniformly within its kind
SLOT_KINDS = (
    (0.35, (frozenset({B1T}), frozenset({B2T}))),
    (0.25, (frozenset({B1T, B2T}),)),
    (0.25, (frozenset({B1E}), frozenset({B2E}))),
    (0.15, (frozenset({B1E, B2E}),)),
)
SLOT_COUNT_WEIGHTS = {1: 0.05, 2: 0.20, 3: 0.75}

BATCH_A_FACTOR = 2.85
BATCH_B_FACTOR = 1.2


class GenerationError(RuntimeError):
    """No compliant instance was found within the attempt budget."""


@dataclass(frozen=True)
class GeneratorConfig:
    n_aircraft: int = 20
    n_technicians: int = 36
    turnaround_factor: float = BATCH_B_FACTOR
    load_band: tuple[float, float] = (0.70, 0.90)
    max_turnaround: int = MAX_TURNAROUND
    max_instance_attempts: int = 1000
    max_wp_retries: int = 50
    seed: int | None = None
    wp_stop_threshold_min: int = 20
    wp_stop_probability: float = 0.65
    n_wps: int = 24
    cert_mix: tuple[int, int, int, int] = DEFAULT_CERT_MIX
    # "day": one day of shifts (36 x 480); "horizon": one day per started day of horizon
    capacity_mode: str = "day"
    single_shift: bool = False
    require_coverage: bool = True

    def __post_init__(self) -> None:
        low, high = self.load_band
        if not 0 < low < high <= 1:
            raise ValueError(f"load_band must satisfy 0 < low < high <= 1, got {self.load_band}")
        if self.turnaround_factor < 1:
            raise ValueError("turnaround_factor must be >= 1")
        if self.n_aircraft < 1 or self.n_technicians < 1 or self.n_wps < 1:
            raise ValueError("n_aircraft, n_technicians and n_wps must be positive")
        if self.capacity_mode not in ("day", "horizon"):
            raise ValueError(f"unknown capacity_mode {self.capacity_mode!r}")
        if not 0 <= self.wp_stop_probability <= 1:
            raise ValueError("wp_stop_probability must lie in [0, 1]")


def batch_config(batch: str, **overrides) -> GeneratorConfig:
    """Preset configs for the slack (``a``) and tight (``b``) regimes."""
    factors = {"a": BATCH_A_FACTOR, "b": BATCH_B_FACTOR}
    if batch not in factors:
        raise ValueError(f"unknown batch {batch!r}")
    overrides.setdefault("turnaround_factor", factors[batch])
    return GeneratorConfig(**overrides)


# --------------------------------------------------------------------------- roster


def _scale_mix(mix: Sequence[int], total: int) -> list[int]:
    """Largest-remainder apportionment of ``mix`` onto ``total`` people."""
    weight = sum(mix)
    raw = [m * total / weight for m in mix]
    counts = [math.floor(r) for r in raw]
    order = sorted(range(len(mix)), key=lambda i: (-(raw[i] - counts[i]), i))
    for i in order[: total - sum(counts)]:
        counts[i] += 1
    return counts


def build_roster(n_technicians: int = 36, cert_mix: Sequence[int] = DEFAULT_CERT_MIX) -> tuple[Technician, ...]:
    """Technicians grouped by certification, dealt round-robin onto the three shift patterns."""
    counts = _scale_mix(cert_mix, n_technicians)
    certs = [c for c, n in zip(CERT_ORDER, counts) for _ in range(n)]
    return tuple(
        Technician(tech_id=i, cert=cert, shift_start=SHIFT_PATTERNS[i % len(SHIFT_PATTERNS)], shift_length=SHIFT_LENGTH)
        for i, cert in enumerate(certs)
    )


def _shift_groups(roster: Sequence[Technician]) -> list[dict[Certification, int]]:
    groups: dict[int, dict[Certification, int]] = {}
    for t in roster:
        g = groups.setdefault(t.shift_start % DAY_MINUTES, {c: 0 for c in CERT_ORDER})
        g[t.cert] += 1
    return list(groups.values())


def _staffable(slots: Sequence[frozenset[Certification]], group: dict[Certification, int]) -> bool:
    # Hall's condition: every subset of slots needs at least as many eligible people
    for r in range(1, len(slots) + 1):
        for subset in itertools.combinations(slots, r):
            union = frozenset().union(*subset)
            if sum(group[c] for c in union) < r:
                return False
    return True


# --------------------------------------------------------------------------- catalog


def _split_duration(total: int, parts: int, rng: random.Random) -> list[int]:
    spare = total - parts * MIN_WO_DURATION
    cuts = sorted(rng.randint(0, spare) for _ in range(parts - 1))
    bounds = [0, *cuts, spare]
    return [MIN_WO_DURATION + bounds[i + 1] - bounds[i] for i in range(parts)]


def _draw_slot(rng: random.Random) -> frozenset[Certification]:
    r = rng.random()
    acc = 0.0
    for weight, choices in SLOT_KINDS:
        acc += weight
        if r < acc:
            return rng.choice(choices)
    return rng.choice(SLOT_KINDS[-1][1])


def synthesize_catalog(
    rng: random.Random,
    n_wps: int = 24,
    roster: Sequence[Technician] | None = None,
) -> tuple[WorkPackageDef, ...]:
    """Random WP catalog. Every WO's crew is staffable from any single shift group of ``roster``."""
    groups = _shift_groups(roster if roster is not None else build_roster())
    counts, weights = zip(*SLOT_COUNT_WEIGHTS.items())
    catalog = []
    for wp_id in range(n_wps):
        duration = rng.randint(MIN_WP_DURATION, MAX_WP_DURATION)
        n_wos = rng.randint(1, min(MAX_WOS_PER_WP, duration // MIN_WO_DURATION))
        wos = []
        for k, wo_dur in enumerate(_split_duration(duration, n_wos, rng)):
            n_slots = rng.choices(counts, weights)[0]
            while True:
                slots = [_draw_slot(rng) for _ in range(n_slots)]
                if all(_staffable(slots, g) for g in groups):
                    break
            wos.append(WorkOrderDef(k, wo_dur, tuple(StaffSlotRequirement(s) for s in slots)))
        catalog.append(WorkPackageDef(wp_id=wp_id, work_orders=tuple(wos)))
    return tuple(catalog)


# --------------------------------------------------------------------------- instances


class CoverageTracker:
    """Per-instance record of which catalog WPs have not been assigned yet."""

    def __init__(self, wp_ids: Sequence[int]):
        self.all_ids = sorted(wp_ids)
        self.unused = set(self.all_ids)

    def mark(self, wp_id: int) -> None:
        self.unused.discard(wp_id)


def _round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


def assign_wps_to_aircraft(
    state: CoverageTracker,
    rng: random.Random,
    durations: dict[int, int],
    config: GeneratorConfig = GeneratorConfig(),
) -> list[int]:
    """WP list for one aircraft: an unused WP first, then random additions.

    Each addition is followed by the soft stop test (cumulative duration above
    the threshold and a successful stop draw); at most ``max_wp_retries``
    additions are made.
    """
    pool = sorted(state.unused) if state.unused else state.all_ids
    first = rng.choice(pool)
    wps = [first]
    state.mark(first)
    cumulative = durations[first]
    for _ in range(config.max_wp_retries):
        pick = rng.choice(state.all_ids)
        wps.append(pick)
        state.mark(pick)
        cumulative += durations[pick]
        if cumulative > config.wp_stop_threshold_min and rng.random() < config.wp_stop_probability:
            break
    return wps


def capacity(instance: ProblemInstance, config: GeneratorConfig) -> int:
    """Available person-minutes used for the load band."""
    per_day = config.n_technicians * SHIFT_LENGTH
    if config.capacity_mode == "day" or config.single_shift:
        return per_day
    horizon = max((ac.departure for ac in instance.aircraft), default=0)
    return per_day * max(1, math.ceil(horizon / DAY_MINUTES))


def _attempt(
    config: GeneratorConfig,
    rng: random.Random,
    catalog: Sequence[WorkPackageDef],
) -> list[Aircraft] | None:
    durations = {wp.wp_id: wp.duration for wp in catalog}
    tracker = CoverageTracker(list(durations))
    aircraft = []
    for i in range(config.n_aircraft):
        landing = rng.randrange(DAY_MINUTES)
        wps = assign_wps_to_aircraft(tracker, rng, durations, config)
        turnaround = _round_half_up(sum(durations[w] for w in wps) * config.turnaround_factor)
        if turnaround > config.max_turnaround:
            return None
        aircraft.append(Aircraft(f"AC{i + 1:03d}", landing, landing + turnaround, turnaround, tuple(wps)))
    return aircraft


def generate_instance(
    config: GeneratorConfig,
    catalog: Sequence[WorkPackageDef] | None = None,
    roster: Sequence[Technician] | None = None,
) -> ProblemInstance:
    """Build one compliant instance; deterministic in ``config.seed``."""
    seed = config.seed if config.seed is not None else random.SystemRandom().randrange(2**63)
    if roster is None:
        roster = build_roster(config.n_technicians, config.cert_mix)
    if catalog is None:
        catalog = synthesize_catalog(random.Random(derive_seed("catalog", seed)), config.n_wps, roster)
    rng = random.Random(seed)
    base_date = EPOCH + timedelta(days=rng.randrange(365))
    for _ in range(config.max_instance_attempts):
        aircraft = _attempt(config, rng, catalog)
        if aircraft is None:
            continue
        instance = ProblemInstance(tuple(aircraft), tuple(catalog), tuple(roster), seed, base_date)
        if not validate_instance(instance, config).violations:
            return instance
    raise GenerationError(
        f"no compliant instance after {config.max_instance_attempts} attempts "
        f"(factor={config.turnaround_factor}, load_band={config.load_band})"
    )


def generate_batch(
    config: GeneratorConfig, count: int, seed: int
) -> tuple[tuple[WorkPackageDef, ...], tuple[Technician, ...], list[ProblemInstance]]:
    """``count`` instances sharing one catalog and roster."""
    roster = build_roster(config.n_technicians, config.cert_mix)
    catalog = synthesize_catalog(random.Random(derive_seed("catalog", seed)), config.n_wps, roster)
    instances = []
    for k in range(count):
        cfg = replace(config, seed=derive_seed("instance", seed, k))
        instances.append(generate_instance(cfg, catalog, roster))
    return catalog, roster, instances


# --------------------------------------------------------------------------- validation


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def validate_instance(instance: ProblemInstance, config: GeneratorConfig = GeneratorConfig()) -> ValidationReport:
    report = ValidationReport()
    add = report.violations.append
    known = set(instance.wp_by_id)
    used: set[int] = set()
    for ac in instance.aircraft:
        if not ac.wp_list:
            add(Violation("empty-wp-list", f"{ac.serial} has no work packages"))
        unknown = sorted(set(ac.wp_list) - known)
        if unknown:
            add(Violation("unknown-wp", f"{ac.serial} references unknown WPs {unknown}"))
        used.update(ac.wp_list)
        if ac.departure != ac.landing + ac.turnaround:
            add(Violation("departure-arithmetic", f"{ac.serial}: departure != landing + turnaround"))
        if ac.turnaround > config.max_turnaround:
            add(Violation("turnaround-cap", f"{ac.serial}: turnaround {ac.turnaround} > {config.max_turnaround}"))
    if config.require_coverage:
        for wp_id in sorted(known - used):
            add(Violation("coverage", f"wp {wp_id} not assigned to any aircraft"))
    if used <= known:
        load = total_man_hours(instance)
        cap = capacity(instance, config)
        low, high = config.load_band
        if not low * cap <= load <= high * cap:
            add(Violation("load-band", f"man-hours {load} outside [{low * cap:.0f}, {high * cap:.0f}]"))
    return report


# --------------------------------------------------------------------------- statistics


@dataclass(frozen=True)
class BatchStats:
    n_instances: int
    avg_total_turnaround: float
    avg_total_wp_duration: float
    ratio: float
    avg_wps_per_aircraft: float

    def as_row(self) -> dict[str, float]:
        return {
            "instances": self.n_instances,
            "avg_total_turnaround_min": round(self.avg_total_turnaround, 2),
            "avg_wp_total_duration_min": round(self.avg_total_wp_duration, 2),
            "pct_turnaround_needed": round(100 * self.ratio, 1),
            "avg_wps_per_aircraft": round(self.avg_wps_per_aircraft, 2),
        }


def instance_statistics(batch: Sequence[ProblemInstance]) -> BatchStats:
    if not batch:
        raise ValueError("instance_statistics needs at least one instance")
    n = len(batch)
    turnaround = sum(sum(ac.turnaround for ac in inst.aircraft) for inst in batch) / n
    duration = sum(total_wp_duration(inst) for inst in batch) / n
    n_wps = sum(len(ac.wp_list) for inst in batch for ac in inst.aircraft)
    n_ac = sum(len(inst.aircraft) for inst in batch)
    return BatchStats(
        n_instances=n,
        avg_total_turnaround=turnaround,
        avg_total_wp_duration=duration,
        ratio=duration / turnaround if turnaround else 0.0,
        avg_wps_per_aircraft=n_wps / n_ac if n_ac else 0.0,
    )
