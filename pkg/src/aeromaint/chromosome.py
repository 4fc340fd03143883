"""Gene and chromosome representation shared by the EA and the decoder."""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .domain import ProblemInstance, WorkPackageDef

GeneKey = tuple[int, int, int]  # (aircraft index, wp_id, occurrence ordinal)


class UnsolvableInstanceError(ValueError):
    """Some staff slot has no qualified technician on the roster."""


class ChromosomeMismatchError(ValueError):
    """Two chromosomes do not cover the same gene multiset."""


@dataclass(frozen=True)
class StaffEntry:
    wo_index: int
    slot_index: int
    tech_id: int


@dataclass(frozen=True, slots=True)
class Gene:
    """One WP occurrence on one aircraft plus its staff allocation.

    ``techs`` is flat, ordered by work order then slot.
    """

    aircraft_ref: int
    wp_id: int
    occurrence: int
    techs: tuple[int, ...]

    @property
    def key(self) -> GeneKey:
        return (self.aircraft_ref, self.wp_id, self.occurrence)

    @property
    def wp_occurrence(self) -> tuple[int, int]:
        return (self.wp_id, self.occurrence)

    def entries(self, instance: ProblemInstance) -> list[StaffEntry]:
        layout = slot_layout(instance.wp(self.wp_id))
        return [StaffEntry(k, j, t) for (k, j), t in zip(layout, self.techs)]

    def label(self) -> str:
        occ = f"#{self.occurrence}" if self.occurrence else ""
        return f"a{self.aircraft_ref}.wp{self.wp_id}{occ}"


Chromosome = list[Gene]


def slot_layout(wp: WorkPackageDef) -> list[tuple[int, int]]:
    """(wo_index, slot_index) for every staff slot of ``wp``, in gene-entry order."""
    return [(k, j) for k, wo in enumerate(wp.work_orders) for j in range(len(wo.slots))]


def slot_choices(instance: ProblemInstance, wp_id: int) -> list[tuple[int, ...]]:
    """Qualified tech ids per gene entry of ``wp_id``."""
    cache = instance.__dict__.setdefault("_slot_choices", {})
    hit = cache.get(wp_id)
    if hit is None:
        wp = instance.wp(wp_id)
        hit = [instance.qualified(slot) for wo in wp.work_orders for slot in wo.slots]
        cache[wp_id] = hit
    return hit


def random_gene(instance: ProblemInstance, key: GeneKey, rng: random.Random) -> Gene:
    a, wp_id, occ = key
    techs = []
    for choices in slot_choices(instance, wp_id):
        if not choices:
            raise UnsolvableInstanceError(f"WP {wp_id} has a slot no technician is qualified for")
        techs.append(choices[rng.randrange(len(choices))])
    return Gene(a, wp_id, occ, tuple(techs))


def chromosome_problems(chromosome: Sequence[Gene], instance: ProblemInstance) -> list[str]:
    """Permutation and qualification violations; empty when valid."""
    problems = []
    got = Counter(g.key for g in chromosome)
    want = Counter(instance.gene_keys)
    if got != want:
        problems.append(f"gene multiset mismatch: missing {dict(want - got)}, extra {dict(got - want)}")
    for g in chromosome:
        if g.key not in want:
            continue
        choices = slot_choices(instance, g.wp_id)
        if len(g.techs) != len(choices):
            problems.append(f"{g.label()}: {len(g.techs)} entries, expected {len(choices)}")
            continue
        for (k, j), t, ok in zip(slot_layout(instance.wp(g.wp_id)), g.techs, choices):
            if t not in ok:
                problems.append(f"{g.label()}.wo{k}.s{j}: tech {t} not qualified")
    return problems
