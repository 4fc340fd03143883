"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

The lines are also collected into the terminal summary.  The full-budget
benchmark reproduction is slow (about an hour on one core) and only runs when
``AEROMAINT_FULL=1`` is set; its reduced smoke variant always runs.
"""

import json
import os
import random
import time
from statistics import mean

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aeromaint.bench import run_instances, write_results
from aeromaint.chromosome import Gene, chromosome_problems
from aeromaint.cli import main
from aeromaint.decoder import DecoderOptions, FitnessReport, check_schedule, decode, evaluate, penalty_counts
from aeromaint.ea import EaParams, crossover, init_individual, mutate_reassign, mutate_relocate
from aeromaint.generator import (
    GeneratorConfig,
    batch_config,
    generate_batch,
    generate_instance,
    instance_statistics,
    validate_instance,
)
from aeromaint.oracle import brute_force_solve, enumerate_chromosomes, verify_witness

from conftest import ACCEPTANCE_LINES, random_micro_instance
from micro_suite import CASES

FULL = os.environ.get("AEROMAINT_FULL") == "1"


def report(criterion, ok, detail):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def _checked(criterion, body):
    """Run ``body``; turn an exception into a FAIL line before re-raising."""
    try:
        return body()
    except AssertionError as exc:
        line = f"criterion {criterion}: FAIL - {exc}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise


# --------------------------------------------------------------------------- 1


def _pair(seed):
    rng = random.Random(seed)
    inst = random_micro_instance(rng, max_genes=6, max_techs=5)
    return inst, init_individual(inst, rng).chromosome, init_individual(inst, rng).chromosome, rng


def test_criterion_1_operators():
    counts = {"crossover": 0, "reassign": 0, "relocate": 0}

    @settings(max_examples=1000, deadline=None, database=None)
    @given(st.integers(0, 2**32))
    def crossover_prop(seed):
        inst, pa, pb, _ = _pair(seed)
        child = crossover(pa, pb)
        assert sorted(g.key for g in child) == sorted(g.key for g in pa)
        assert all(g in pa or g in pb for g in child)
        counts["crossover"] += 1

    @settings(max_examples=1000, deadline=None, database=None)
    @given(st.integers(0, 2**32))
    def reassign_prop(seed):
        inst, pa, _, rng = _pair(seed)
        out = mutate_reassign(pa, inst, rng)
        assert [g.key for g in out] == [g.key for g in pa]
        assert chromosome_problems(out, inst) == []
        counts["reassign"] += 1

    @settings(max_examples=1000, deadline=None, database=None)
    @given(st.integers(0, 2**32))
    def relocate_prop(seed):
        inst, pa, _, rng = _pair(seed)
        out = mutate_relocate(pa, rng)
        assert sorted(g.key for g in out) == sorted(g.key for g in pa)
        assert sorted(out, key=lambda g: g.key) == sorted(pa, key=lambda g: g.key)
        assert chromosome_problems(out, inst) == []
        counts["relocate"] += 1

    def body():
        crossover_prop()
        reassign_prop()
        relocate_prop()
        labels = ["a0.wp1", "a1.wp3", "a2.wp0", "a0.wp0", "a1.wp4", "a2.wp2"]
        other = ["a2.wp0", "a0.wp0", "a0.wp1", "a1.wp4", "a1.wp3", "a2.wp2"]

        def gene(label):
            a, wp = label.split(".")
            return Gene(int(a[1:]), int(wp[2:]), 0, ())

        child = [g.label() for g in crossover([gene(x) for x in labels], [gene(x) for x in other])]
        assert child == ["a0.wp1", "a2.wp0", "a1.wp3", "a0.wp0", "a1.wp4", "a2.wp2"], child
        return child

    _checked(1, body)
    ok = min(counts.values()) >= 1000
    report(1, ok, f"cases per property {counts}; worked crossover example reproduced")


# --------------------------------------------------------------------------- 2


def _soundness_instances():
    insts = [random_micro_instance(random.Random(500 + k), max_genes=6, max_techs=5) for k in range(10)]
    for k in range(10):
        cfg = GeneratorConfig(n_aircraft=4, seed=900 + k, require_coverage=False, load_band=(0.02, 0.9))
        insts.append(generate_instance(cfg))
    return insts


def test_criterion_2_decoder_soundness():
    rng = random.Random(2)
    modes = [
        DecoderOptions(),
        DecoderOptions(availability="rotating"),
        DecoderOptions(availability="rotating", shift_limit="horizon"),
    ]
    checked = violations = 0
    examples = []
    for inst in _soundness_instances():
        for _ in range(25):
            chrom = init_individual(inst, rng).chromosome
            for opts in modes:
                problems = check_schedule(decode(chrom, inst, opts), inst)
                violations += len(problems)
                examples.extend(problems[:1])
            checked += 1
    ok = checked == 500 and violations == 0
    report(2, ok, f"{checked} chromosomes x {len(modes)} decoder modes over 20 instances, {violations} violations {examples[:3]}")


# --------------------------------------------------------------------------- 3


def test_criterion_3_oracle_equivalence():
    lines = []
    ok = True
    for case in CASES:
        inst = case.build()
        params = EaParams(pop_size=2, eval_budget=2, availability=case.availability)
        assert len(inst.gene_keys) <= 6 and len(inst.roster) <= 5
        oracle = brute_force_solve(inst, params)
        best = min(
            FitnessReport.from_counts(*penalty_counts(c, inst, params.decoder_options)).fitness
            for c in enumerate_chromosomes(inst)
        )
        witness_ok = verify_witness(oracle, inst, params) == []
        documented = oracle.optimal_penalty == case.optimum
        if case.reachable:
            good = best == oracle.optimal_penalty
        else:
            good = oracle.optimal_penalty <= best
        ok &= good and witness_ok and documented
        lines.append(f"{case.name}: oracle={oracle.optimal_penalty} decoded={best}{'' if case.reachable else ' (gap)'}")
    reachable = sum(c.reachable for c in CASES)
    report(3, ok and len(CASES) >= 10, f"{len(CASES)} micro-instances, {reachable} reachable equal; " + "; ".join(lines))


# --------------------------------------------------------------------------- 4


def test_criterion_4_fitness_arithmetic():
    ok = all(
        FitnessReport.from_counts(w, l).fitness == w * 1 + l * 10
        and ((FitnessReport.from_counts(w, l).fitness == 0) == (w == 0 and l == 0))
        for w in range(0, 301)
        for l in range(0, 31)
    )
    rng = random.Random(4)
    decoded = 0
    for k in range(40):
        inst = random_micro_instance(rng, max_genes=6, max_techs=5)
        chrom = init_individual(inst, rng).chromosome
        sched = decode(chrom, inst, DecoderOptions(shift_limit="horizon" if k % 2 else "departure"))
        finish = {}
        for (a, *_), (_, e) in sched.wo_times.items():
            finish[a] = max(finish.get(a, 0), e)
        w = len(sched.uncovered)
        l = sum(f > inst.aircraft[a].departure for a, f in finish.items())
        rep = evaluate(sched, inst)
        ok &= (rep.w, rep.l, rep.fitness) == (w, l, w + 10 * l)
        decoded += 1
    report(4, ok, f"w*1+l*10 exact on a 301x31 grid and {decoded} decoded schedules; zero iff w=l=0")


# --------------------------------------------------------------------------- 5


def test_criterion_5_generator_fidelity():
    start = time.perf_counter()
    results = {}
    ok = True
    for batch, count, pct, wps in (("a", 40, 35.0, 2.7), ("b", 20, 83.0, 2.3)):
        cfg = batch_config(batch)
        _, _, instances = generate_batch(cfg, count, seed=2025)
        valid = all(validate_instance(i, cfg).ok for i in instances)
        stats = instance_statistics(instances)
        ratio = 100 * stats.ratio
        good = valid and len(instances) == count and abs(ratio - pct) <= 5 and abs(stats.avg_wps_per_aircraft - wps) <= 0.5
        ok &= good
        results[batch] = f"{count} valid={valid} ratio={ratio:.1f}% (target {pct}) wps/ac={stats.avg_wps_per_aircraft:.2f} (target {wps})"
    elapsed = time.perf_counter() - start
    report(5, ok and elapsed < 60, f"a: {results['a']}; b: {results['b']}; {elapsed:.1f}s")


# --------------------------------------------------------------------------- 6 and 7

SMOKE = dict(pop_size=150, eval_budget=20_000)


@pytest.fixture(scope="module")
def smoke_run(tmp_path_factory):
    """generate -> bench -> results.csv on 3-aircraft batches, via the CLI."""
    root = tmp_path_factory.mktemp("smoke")
    start = time.perf_counter()
    for batch in ("a", "b"):
        main([
            "generate", "--batch", batch, "--count", "1", "--seed", "6", "--n-aircraft", "3",
            "--no-coverage", "--load-band", "0.02", "0.9", "--out", str(root / batch),
        ])
    params = root / "params.json"
    params.write_text(json.dumps({**SMOKE, "trace_every": 500}))
    outputs = {}
    for batch in ("a", "b"):
        out = root / f"results_{batch}.csv"
        main(["bench", "--batch", str(root / batch), "--repeats", "2", "--params", str(params), "--out", str(out)])
        outputs[batch] = out
    elapsed = time.perf_counter() - start
    return root, outputs, params, elapsed


def test_criterion_6_smoke(smoke_run):
    _, outputs, _, elapsed = smoke_run
    rows = [line.split(",") for out in outputs.values() for line in out.read_text().splitlines()[1:]]
    bests = [float(r[1]) for r in rows]
    ok = elapsed < 60 and len(rows) == 2 and all(b == 0 for b in bests)
    report("6 (smoke)", ok, f"pop 150, 20000 evals, 3 aircraft, 2 instances x 2 runs: best={bests}, pipeline {elapsed:.1f}s")


@pytest.mark.slow
@pytest.mark.skipif(not FULL, reason="set AEROMAINT_FULL=1 for the full-budget reproduction")
def test_criterion_6_full(tmp_path):
    start = time.perf_counter()
    params = EaParams(stop_at_optimum=True)
    jobs = []
    for batch in ("a", "b"):
        _, _, instances = generate_batch(batch_config(batch), 5, seed=2025)
        jobs += [(f"{batch}{k + 1}", inst) for k, inst in enumerate(instances)]
    rows, runs = run_instances(jobs, params, repeats=10, master_seed=0, workers=os.cpu_count() or 1)
    write_results(rows, tmp_path / "results.csv", runs=runs)
    print((tmp_path / "results.csv").read_text())
    mean_avg = mean(r.avg for r in rows)
    per_batch = {b: mean(r.avg for r in rows if r.instance_id.startswith(b)) for b in "ab"}
    ok = all(r.best == 0 for r in rows) and mean_avg <= 2.0
    detail = (
        f"{len(rows)} instances x 10 runs, best={[r.best for r in rows]}, "
        f"mean Avg={mean_avg:.2f} (a {per_batch['a']:.2f}, b {per_batch['b']:.2f}), {time.perf_counter() - start:.0f}s"
    )
    report("6 (full)", ok, detail)


def test_criterion_7_elitism_and_determinism(smoke_run):
    root, outputs, params, _ = smoke_run
    traces = []
    for out in outputs.values():
        for line in out.with_suffix(".runs.jsonl").read_text().splitlines():
            traces.append([f for _, f in json.loads(line)["population_min_trace"]])
    monotone = all(len(t) > 1 and all(b <= a for a, b in zip(t, t[1:])) for t in traces)
    again = root / "again.csv"
    main(["bench", "--batch", str(root / "a"), "--repeats", "2", "--params", str(params), "--out", str(again)])
    identical = again.read_bytes() == outputs["a"].read_bytes()
    report(7, monotone and identical, f"{len(traces)} logged runs non-increasing={monotone}; rerun results.csv identical={identical}")
