"""Problem-domain types for aircraft maintenance staffing, plus CSV I/O."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

SHIFT_LENGTH = 480
DAY_MINUTES = 1440
MAX_TURNAROUND = 1680
MIN_WP_DURATION = 45
MAX_WP_DURATION = 150
SHIFT_PATTERNS = (0, 480, 960)
# how a roster entry's shift maps to availability windows
AVAILABILITY_MODES = ("rotating", "single", "continuous")


class ValidationError(ValueError):
    """Raised when domain data is structurally inconsistent."""


class Certification(Enum):
    B1_TECHNICIAN = "B1T"
    B2_TECHNICIAN = "B2T"
    B1_ENGINEER = "B1E"
    B2_ENGINEER = "B2E"

    @property
    def token(self) -> str:
        return self.value

    @classmethod
    def from_token(cls, token: str) -> "Certification":
        token = token.strip()
        for cert in cls:
            if token in (cert.value, cert.name):
                return cert
        raise ValidationError(f"unknown certification token {token!r}")


CERT_ORDER = tuple(Certification)


@dataclass(frozen=True)
class StaffSlotRequirement:
    allowed_certs: frozenset[Certification]

    def __post_init__(self) -> None:
        certs = frozenset(self.allowed_certs)
        if not certs:
            raise ValidationError("a staff slot must allow at least one certification")
        if not all(isinstance(c, Certification) for c in certs):
            raise ValidationError(f"bad certification set {certs!r}")
        object.__setattr__(self, "allowed_certs", certs)

    @classmethod
    def of(cls, *certs: Certification) -> "StaffSlotRequirement":
        return cls(frozenset(certs))

    def token(self) -> str:
        return "+".join(c.token for c in CERT_ORDER if c in self.allowed_certs)

    @classmethod
    def parse(cls, text: str) -> "StaffSlotRequirement":
        return cls(frozenset(Certification.from_token(t) for t in text.split("+")))


@dataclass(frozen=True)
class WorkOrderDef:
    """An atomic, non-preemptible task; all slots share one time interval."""

    wo_id: int
    duration: int
    slots: tuple[StaffSlotRequirement, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots", tuple(self.slots))
        if int(self.duration) != self.duration or self.duration < 1:
            raise ValidationError(f"work order {self.wo_id}: duration must be a positive integer")
        if not self.slots:
            raise ValidationError(f"work order {self.wo_id}: needs at least one staff slot")


@dataclass(frozen=True)
class WorkPackageDef:
    """A catalog entry. ``work_orders`` order is the mandatory execution order.

    ``duration``, ``man_hours`` and ``crew_size`` are derived from the work
    orders when omitted and cross-checked when given.
    """

    wp_id: int
    work_orders: tuple[WorkOrderDef, ...]
    duration: int = -1
    man_hours: int = -1
    crew_size: int = -1

    def __post_init__(self) -> None:
        wos = tuple(self.work_orders)
        if not wos:
            raise ValidationError(f"WP {self.wp_id}: needs at least one work order")
        object.__setattr__(self, "work_orders", wos)
        derived = {
            "duration": sum(wo.duration for wo in wos),
            "man_hours": sum(wo.duration * len(wo.slots) for wo in wos),
            "crew_size": max(len(wo.slots) for wo in wos),
        }
        for name, value in derived.items():
            given = getattr(self, name)
            if given == -1:
                object.__setattr__(self, name, value)
            elif given != value:
                raise ValidationError(f"WP {self.wp_id}: {name}={given} but work orders imply {value}")
        if not MIN_WP_DURATION <= self.duration <= MAX_WP_DURATION:
            raise ValidationError(
                f"WP {self.wp_id}: duration {self.duration} outside "
                f"[{MIN_WP_DURATION}, {MAX_WP_DURATION}]"
            )

    @property
    def n_slots(self) -> int:
        return sum(len(wo.slots) for wo in self.work_orders)


@dataclass(frozen=True)
class Technician:
    tech_id: int
    cert: Certification
    shift_start: int
    shift_length: int = SHIFT_LENGTH

    def windows(self, horizon_end: int, mode: str = "rotating") -> list[tuple[int, int]]:
        """Availability windows ``[start, end)`` under ``mode``.

        rotating: the 8-hour block repeats every day up to ``horizon_end``;
        single: one block only; continuous: the whole horizon.
        """
        if mode == "single":
            return [(self.shift_start, self.shift_start + self.shift_length)]
        if mode == "continuous":
            return [(0, max(horizon_end, 1))]
        if mode != "rotating":
            raise ValueError(f"unknown availability mode {mode!r}")
        out = []
        start = self.shift_start
        while start < max(horizon_end, self.shift_start + 1):
            out.append((start, start + self.shift_length))
            start += DAY_MINUTES
        return out


@dataclass(frozen=True)
class Aircraft:
    """One aircraft visit. Not self-validating: see ``validate_instance``."""

    serial: str
    landing: int
    departure: int
    turnaround: int
    wp_list: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "wp_list", tuple(self.wp_list))


@dataclass(frozen=True)
class ProblemInstance:
    aircraft: tuple[Aircraft, ...]
    catalog: tuple[WorkPackageDef, ...]
    roster: tuple[Technician, ...]
    seed: int | None = None
    base_date: date = date(2025, 1, 1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "aircraft", tuple(self.aircraft))
        object.__setattr__(self, "catalog", tuple(self.catalog))
        object.__setattr__(self, "roster", tuple(self.roster))
        ids = [wp.wp_id for wp in self.catalog]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate wp_id in catalog")
        tids = [t.tech_id for t in self.roster]
        if len(set(tids)) != len(tids):
            raise ValidationError("duplicate tech_id in roster")

    @cached_property
    def wp_by_id(self) -> dict[int, WorkPackageDef]:
        return {wp.wp_id: wp for wp in self.catalog}

    @cached_property
    def tech_by_id(self) -> dict[int, Technician]:
        return {t.tech_id: t for t in self.roster}

    def wp(self, wp_id: int) -> WorkPackageDef:
        try:
            return self.wp_by_id[wp_id]
        except KeyError:
            raise ValidationError(f"unknown wp_id {wp_id}") from None

    @cached_property
    def gene_keys(self) -> tuple[tuple[int, int, int], ...]:
        """Every (aircraft index, wp_id, occurrence ordinal) pairing, in fleet order."""
        keys = []
        for a, ac in enumerate(self.aircraft):
            seen: dict[int, int] = {}
            for wp_id in ac.wp_list:
                occ = seen.get(wp_id, 0)
                seen[wp_id] = occ + 1
                keys.append((a, wp_id, occ))
        return tuple(keys)

    @cached_property
    def horizon_end(self) -> int:
        """Upper bound for any scheduled minute: latest departure plus longest turnaround."""
        if not self.aircraft:
            return 0
        return max(ac.departure for ac in self.aircraft) + max(ac.turnaround for ac in self.aircraft)

    @cached_property
    def _qualified_cache(self) -> dict[frozenset[Certification], tuple[int, ...]]:
        return {}

    def qualified(self, slot: StaffSlotRequirement) -> tuple[int, ...]:
        """Sorted tech ids eligible for ``slot`` (cached per cert set)."""
        cache = self._qualified_cache
        key = slot.allowed_certs
        hit = cache.get(key)
        if hit is None:
            hit = tuple(sorted(t.tech_id for t in self.roster if t.cert in key))
            cache[key] = hit
        return hit


def qualified_staff(instance: ProblemInstance, slot: StaffSlotRequirement) -> set[int]:
    return set(instance.qualified(slot))


def total_man_hours(instance: ProblemInstance) -> int:
    """Person-minutes of labour across every WP assigned to every aircraft."""
    return sum(instance.wp(wp_id).man_hours for ac in instance.aircraft for wp_id in ac.wp_list)


def total_wp_duration(instance: ProblemInstance) -> int:
    return sum(instance.wp(wp_id).duration for ac in instance.aircraft for wp_id in ac.wp_list)


# --------------------------------------------------------------------------- CSV

INSTANCE_HEADER = ["serial", "landing_datetime", "departure_datetime", "turnaround_minutes", "wp_list"]
CATALOG_HEADER = ["wp_id", "duration_min", "man_hours_min", "crew_size", "wo_spec"]
ROSTER_HEADER = ["tech_id", "certification", "shift_start_min", "shift_length_min"]
_DT_FORMAT = "%Y-%m-%dT%H:%M"
_META_RE = re.compile(r"^#\s*(.*)$")


def _to_datetime(base: date, minutes: int) -> str:
    return (datetime.combine(base, datetime.min.time()) + timedelta(minutes=minutes)).strftime(_DT_FORMAT)


def _from_datetime(base: date, text: str) -> int:
    delta = datetime.strptime(text.strip(), _DT_FORMAT) - datetime.combine(base, datetime.min.time())
    return int(delta.total_seconds() // 60)


def _write_rows(header: Sequence[str], rows: Iterable[Sequence[object]], meta: str | None = None) -> str:
    buf = io.StringIO()
    if meta:
        buf.write(f"# {meta}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _read_rows(text: str, header: Sequence[str]) -> tuple[dict[str, str], list[dict[str, str]]]:
    meta: dict[str, str] = {}
    lines = text.splitlines()
    while lines and (m := _META_RE.match(lines[0])):
        for part in m.group(1).split():
            key, _, value = part.partition("=")
            meta[key] = value
        lines.pop(0)
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != list(header):
        raise ValidationError(f"expected CSV header {','.join(header)}, got {reader.fieldnames}")
    return meta, [{k.strip(): (v or "").strip() for k, v in row.items()} for row in reader]


def catalog_to_csv(catalog: Sequence[WorkPackageDef]) -> str:
    rows = []
    for wp in catalog:
        spec = ";".join(
            f"{wo.duration}@" + "|".join(s.token() for s in wo.slots) for wo in wp.work_orders
        )
        rows.append([wp.wp_id, wp.duration, wp.man_hours, wp.crew_size, spec])
    return _write_rows(CATALOG_HEADER, rows)


def catalog_from_csv(text: str) -> tuple[WorkPackageDef, ...]:
    _, rows = _read_rows(text, CATALOG_HEADER)
    catalog = []
    for row in rows:
        wos = []
        for k, part in enumerate(row["wo_spec"].split(";")):
            dur, _, slots = part.partition("@")
            if not slots:
                raise ValidationError(f"malformed wo_spec entry {part!r}")
            wos.append(WorkOrderDef(k, int(dur), tuple(StaffSlotRequirement.parse(s) for s in slots.split("|"))))
        catalog.append(
            WorkPackageDef(
                wp_id=int(row["wp_id"]),
                work_orders=tuple(wos),
                duration=int(row["duration_min"]),
                man_hours=int(row["man_hours_min"]),
                crew_size=int(row["crew_size"]),
            )
        )
    return tuple(catalog)


def roster_to_csv(roster: Sequence[Technician]) -> str:
    return _write_rows(
        ROSTER_HEADER, ([t.tech_id, t.cert.token, t.shift_start, t.shift_length] for t in roster)
    )


def roster_from_csv(text: str) -> tuple[Technician, ...]:
    _, rows = _read_rows(text, ROSTER_HEADER)
    return tuple(
        Technician(
            tech_id=int(r["tech_id"]),
            cert=Certification.from_token(r["certification"]),
            shift_start=int(r["shift_start_min"]),
            shift_length=int(r["shift_length_min"]),
        )
        for r in rows
    )


def aircraft_to_csv(instance: ProblemInstance) -> str:
    """Instance CSV; a leading ``#`` line carries the seed and base date."""
    base = instance.base_date
    rows = (
        [
            ac.serial,
            _to_datetime(base, ac.landing),
            _to_datetime(base, ac.departure),
            ac.turnaround,
            ";".join(str(w) for w in ac.wp_list),
        ]
        for ac in instance.aircraft
    )
    meta = f"seed={'' if instance.seed is None else instance.seed} base_date={base.isoformat()}"
    return _write_rows(INSTANCE_HEADER, rows, meta)


def aircraft_from_csv(text: str) -> tuple[tuple[Aircraft, ...], int | None, date]:
    meta, rows = _read_rows(text, INSTANCE_HEADER)
    if meta.get("base_date"):
        base = date.fromisoformat(meta["base_date"])
    elif rows:
        base = min(datetime.strptime(r["landing_datetime"], _DT_FORMAT) for r in rows).date()
    else:
        base = ProblemInstance.base_date
    seed = int(meta["seed"]) if meta.get("seed") else None
    aircraft = tuple(
        Aircraft(
            serial=r["serial"],
            landing=_from_datetime(base, r["landing_datetime"]),
            departure=_from_datetime(base, r["departure_datetime"]),
            turnaround=int(r["turnaround_minutes"]),
            wp_list=tuple(int(x) for x in r["wp_list"].split(";") if x.strip()),
        )
        for r in rows
    )
    return aircraft, seed, base


def parse_instance(instance_csv: str, catalog_csv: str, roster_csv: str) -> ProblemInstance:
    aircraft, seed, base = aircraft_from_csv(instance_csv)
    return ProblemInstance(
        aircraft=aircraft,
        catalog=catalog_from_csv(catalog_csv),
        roster=roster_from_csv(roster_csv),
        seed=seed,
        base_date=base,
    )


def load_instance(instance_path: str | Path, catalog_path: str | Path, roster_path: str | Path) -> ProblemInstance:
    return parse_instance(
        Path(instance_path).read_text(), Path(catalog_path).read_text(), Path(roster_path).read_text()
    )


def save_instance(instance: ProblemInstance, instance_path: str | Path) -> None:
    Path(instance_path).write_text(aircraft_to_csv(instance))
