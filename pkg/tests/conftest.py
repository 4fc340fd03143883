from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

from aeromaint.domain import (
    CERT_ORDER,
    Aircraft,
    Certification,
    ProblemInstance,
    StaffSlotRequirement,
    Technician,
    WorkOrderDef,
    WorkPackageDef,
)

B1T, B2T, B1E, B2E = CERT_ORDER


def make_wp(wp_id, *wos):
    """``wos``: (duration, [cert set, ...]) per work order."""
    return WorkPackageDef(
        wp_id,
        tuple(WorkOrderDef(k, d, tuple(StaffSlotRequirement(frozenset(c)) for c in slots)) for k, (d, slots) in enumerate(wos)),
    )


def make_instance(aircraft, catalog, roster, seed=None):
    """``aircraft``: (landing, turnaround, wp_list); ``roster``: (cert, shift_start)."""
    acs = tuple(
        Aircraft(f"AC{i}", landing, landing + ta, ta, tuple(wps)) for i, (landing, ta, wps) in enumerate(aircraft)
    )
    techs = tuple(Technician(i, cert, start) for i, (cert, start) in enumerate(roster))
    return ProblemInstance(acs, tuple(catalog), techs, seed)


def contention_instance():
    """Two aircraft, one 120-min window, each needing the sole B1E for 60 minutes."""
    catalog = [make_wp(0, (60, [{B1E}]))]
    return make_instance([(100, 120, [0]), (100, 120, [0])], catalog, [(B1E, 0), (B1T, 0)])


def random_micro_instance(rng: random.Random, max_genes=4, max_techs=4, max_aircraft=3):
    """Small random instance for oracle / property checks (continuous availability)."""
    n_wp = rng.randint(1, 3)
    catalog = []
    for wp_id in range(n_wp):
        n_wo = rng.randint(1, 2)
        total = rng.randint(45, 90)
        first = rng.randint(15, total - 15) if n_wo == 2 else total
        durs = [first, total - first] if n_wo == 2 else [total]
        wos = []
        for d in durs:
            slots = [rng.choice([{B1T}, {B2T}, {B1T, B2T}, {B1E}, {B1E, B2E}]) for _ in range(rng.randint(1, 2))]
            wos.append((d, slots))
        catalog.append(make_wp(wp_id, *wos))
    n_ac = rng.randint(1, max_aircraft)
    n_genes = rng.randint(n_ac, max_genes)
    lists = [[rng.randrange(n_wp)] for _ in range(n_ac)]
    for _ in range(n_genes - n_ac):
        rng.choice(lists).append(rng.randrange(n_wp))
    aircraft = []
    for wps in lists:
        dur = sum(catalog[w].duration for w in wps)
        aircraft.append((rng.randrange(0, 120), int(dur * rng.choice([1.0, 1.3, 2.0])), wps))
    needed = [wo_slot.allowed_certs for wp in catalog for wo in wp.work_orders for wo_slot in wo.slots]
    while True:
        roster = [(rng.choice(CERT_ORDER), rng.choice([0, 480, 960])) for _ in range(rng.randint(2, max_techs))]
        held = {cert for cert, _ in roster}
        if all(certs & held for certs in needed):
            return make_instance(aircraft, catalog, roster)


@pytest.fixture
def rng():
    return random.Random(12345)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
