import random

import pytest

from aeromaint.decoder import penalty_counts
from aeromaint.ea import EaParams
from aeromaint.oracle import OracleSizeError, brute_force_solve, enumerate_chromosomes, verify_witness

from conftest import B1E, B1T, B2T, contention_instance, make_instance, make_wp, random_micro_instance


def test_single_work_order():
    inst = make_instance([(50, 100, [0])], [make_wp(0, (60, [{B1T}]))], [(B1T, 0)])
    res = brute_force_solve(inst)
    assert (res.optimal_penalty, res.w, res.l) == (0, 0, 0)
    assert [(e.start, e.techs) for e in res.witness] == [(50, (0,))]
    assert verify_witness(res, inst) == []


def test_unstaffable_slots_count_once_each():
    inst = make_instance([(0, 100, [0])], [make_wp(0, (60, [{B1E}, {B1T}, {B1E}]))], [(B1T, 0)])
    res = brute_force_solve(inst)
    assert (res.w, res.l, res.optimal_penalty) == (2, 0, 2)
    assert verify_witness(res, inst) == []


def test_contention_is_resolved():
    inst = contention_instance()
    res = brute_force_solve(inst)
    assert res.optimal_penalty == 0
    assert verify_witness(res, inst) == []


def test_lateness_beats_many_uncovered_slots_when_cheaper():
    # one tech, two aircraft with 60-minute windows and a four-slot WO each:
    # leaving 3 slots open costs 3 per aircraft, being late costs 10
    wp = make_wp(0, (60, [{B1T, B2T}] * 4))
    inst = make_instance([(0, 60, [0]), (0, 60, [0])], [wp], [(B1T, 0), (B2T, 0), (B1T, 0), (B2T, 0)])
    res = brute_force_solve(inst)
    assert (res.w, res.l) == (4, 0)
    assert verify_witness(res, inst) == []


def test_refuses_large_instances():
    inst = make_instance([(0, 1000, [0] * 7)], [make_wp(0, (60, [{B1T}]))], [(B1T, 0)])
    with pytest.raises(OracleSizeError):
        brute_force_solve(inst)
    crowd = make_instance([(0, 100, [0])], [make_wp(0, (60, [{B1T}]))], [(B1T, 0)] * 6)
    with pytest.raises(OracleSizeError):
        brute_force_solve(crowd)


def test_enumeration_limit():
    inst = make_instance([(0, 1000, [0] * 6)], [make_wp(0, (60, [{B1T}, {B1T}]))], [(B1T, 0)] * 5)
    with pytest.raises(OracleSizeError):
        next(enumerate_chromosomes(inst, limit=1000))


@pytest.mark.parametrize("seed", range(12))
def test_oracle_bounds_every_decoded_chromosome(seed):
    inst = random_micro_instance(random.Random(seed), max_genes=4, max_techs=4)
    res = brute_force_solve(inst)
    assert verify_witness(res, inst) == []
    params = EaParams(pop_size=2, eval_budget=2)
    best = min(
        w + 10 * l for w, l in (penalty_counts(c, inst, params.decoder_options) for c in enumerate_chromosomes(inst))
    )
    assert res.optimal_penalty <= best
