"""Steady-state evolutionary algorithm over WP-permutation chromosomes.

Each generation produces one child: a clone of one tournament-selected parent
or the ordered crossover of two, chosen at random. The child is mutated once,
evaluated, and replaces the worst of a replacement tournament if strictly
fitter. The run stops once the evaluation budget is spent.

RNG consumption order (single ``random.Random`` per run): initial population
(per individual: shuffle, then staff draws in gene order); then per
generation: clone/crossover draw, parent tournament draws, mutation operator
draw, mutation site draws, replacement tournament draws.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from .chromosome import (
    Chromosome,
    ChromosomeMismatchError,
    Gene,
    random_gene,
    slot_choices,
)
from .decoder import (
    DecoderOptions,
    FitnessReport,
    Schedule,
    decode,
    penalty_counts,
)
from .domain import ProblemInstance

@dataclass(frozen=True)
class EaParams:
    pop_size: int = 1500
    eval_budget: int = 200_000
    ks: int = 2
    kr: int = 2
    lp_penalty: float = 10
    wp_penalty: float = 1
    clone_probability: float = 0.5
    seed: int | None = None
    availability: str = "continuous"
    cross_shift_blocks: bool = True
    shift_limit: str = "departure"
    # population-minimum samples every this many evaluations (0 disables)
    trace_every: int = 1000
    # fitness 0 is the global optimum, so nothing reported changes if the run ends there
    stop_at_optimum: bool = False

    def __post_init__(self) -> None:
        if self.pop_size < 2:
            raise ValueError("pop_size must be at least 2")
        if self.ks < 1 or self.kr < 1:
            raise ValueError("tournament sizes must be at least 1")
        if self.eval_budget < self.pop_size:
            raise ValueError(f"eval_budget ({self.eval_budget}) must be >= pop_size ({self.pop_size})")
        if not 0 <= self.clone_probability <= 1:
            raise ValueError("clone_probability must lie in [0, 1]")

    @property
    def decoder_options(self) -> DecoderOptions:
        return DecoderOptions(
            availability=self.availability,
            cross_shift_blocks=self.cross_shift_blocks,
            shift_limit=self.shift_limit,
        )


@dataclass
class Individual:
    chromosome: Chromosome
    fitness: float
    report: FitnessReport


@dataclass
class RunResult:
    best: Individual
    best_fitness: float
    last_improvement_eval: int
    evaluations: int
    report: FitnessReport
    # (evaluation index, best fitness) at each strict improvement
    improvements: list[tuple[int, float]] = field(default_factory=list)
    # (evaluation index, population minimum) sampled every ``trace_every`` evaluations
    population_min_trace: list[tuple[int, float]] = field(default_factory=list)

    def schedule(self, instance: ProblemInstance, params: EaParams = EaParams()) -> Schedule:
        return decode(self.best.chromosome, instance, params.decoder_options)


def evaluate_chromosome(chromosome: Sequence[Gene], instance: ProblemInstance, params: EaParams) -> FitnessReport:
    w, l = penalty_counts(chromosome, instance, params.decoder_options)
    return FitnessReport.from_counts(w, l, params.wp_penalty, params.lp_penalty)


def init_individual(instance: ProblemInstance, rng: random.Random, params: EaParams = EaParams()) -> Individual:
    keys = list(instance.gene_keys)
    rng.shuffle(keys)
    chromosome = [random_gene(instance, key, rng) for key in keys]
    report = evaluate_chromosome(chromosome, instance, params)
    return Individual(chromosome, report.fitness, report)


def tournament_select(population: Sequence[Individual], k: int, rng: random.Random) -> Individual:
    """Fittest of ``k`` draws with replacement; the first drawn wins ties."""
    n = len(population)
    best = population[rng.randrange(n)]
    for _ in range(k - 1):
        cand = population[rng.randrange(n)]
        if cand.fitness < best.fitness:
            best = cand
    return best


def replacement_index(population: Sequence[Individual], k: int, rng: random.Random) -> int:
    """Index of the least fit of ``k`` draws with replacement; the first drawn wins ties."""
    n = len(population)
    worst = rng.randrange(n)
    for _ in range(k - 1):
        i = rng.randrange(n)
        if population[i].fitness > population[worst].fitness:
            worst = i
    return worst


def crossover(pa: Sequence[Gene], pb: Sequence[Gene]) -> Chromosome:
    """Alternate between parents from the front, appending genes not yet taken.

    Gene identity is (aircraft, wp_id, occurrence); a gene keeps the staff
    allocation of the parent it was copied from.
    """
    if len(pa) != len(pb) or sorted(g.key for g in pa) != sorted(g.key for g in pb):
        raise ChromosomeMismatchError("parents are not permutations of the same genes")
    child: Chromosome = []
    taken = set()
    for ga, gb in zip(pa, pb):
        if ga.key not in taken:
            taken.add(ga.key)
            child.append(ga)
        if gb.key not in taken:
            taken.add(gb.key)
            child.append(gb)
    return child


def mutate_reassign(chromosome: Chromosome, instance: ProblemInstance, rng: random.Random) -> Chromosome:
    gi = rng.randrange(len(chromosome))
    gene = chromosome[gi]
    choices = slot_choices(instance, gene.wp_id)
    ei = rng.randrange(len(gene.techs))
    options = choices[ei]
    techs = list(gene.techs)
    techs[ei] = options[rng.randrange(len(options))]
    out = list(chromosome)
    out[gi] = Gene(gene.aircraft_ref, gene.wp_id, gene.occurrence, tuple(techs))
    return out


def mutate_relocate(chromosome: Chromosome, rng: random.Random) -> Chromosome:
    out = list(chromosome)
    gene = out.pop(rng.randrange(len(out)))
    out.insert(rng.randrange(len(out) + 1), gene)
    return out


def mutate(ind: Individual, instance: ProblemInstance, rng: random.Random, params: EaParams = EaParams()) -> Individual:
    """Apply exactly one of the two mutation operators (equal odds) and re-evaluate."""
    if rng.random() < 0.5:
        chromosome = mutate_reassign(ind.chromosome, instance, rng)
    else:
        chromosome = mutate_relocate(ind.chromosome, rng)
    report = evaluate_chromosome(chromosome, instance, params)
    return Individual(chromosome, report.fitness, report)


def _mutated_chromosome(chromosome: Chromosome, instance: ProblemInstance, rng: random.Random) -> Chromosome:
    if rng.random() < 0.5:
        return mutate_reassign(chromosome, instance, rng)
    return mutate_relocate(chromosome, rng)


def run_ea(instance: ProblemInstance, params: EaParams = EaParams()) -> RunResult:
    if not instance.gene_keys:
        raise ValueError("instance has no aircraft-WP pairings")
    rng = random.Random(params.seed)
    budget = params.eval_budget
    evals = 0
    best: Individual | None = None
    last_improvement = 0
    improvements: list[tuple[int, float]] = []
    trace: list[tuple[int, float]] = []

    population: list[Individual] = []
    for _ in range(params.pop_size):
        ind = init_individual(instance, rng, params)
        evals += 1
        population.append(ind)
        if best is None or ind.fitness < best.fitness:
            best, last_improvement = ind, evals
            improvements.append((evals, ind.fitness))
    if params.trace_every:
        trace.append((evals, min(p.fitness for p in population)))

    while evals < budget and not (params.stop_at_optimum and best.fitness <= 0):
        if rng.random() < params.clone_probability:
            chromosome = tournament_select(population, params.ks, rng).chromosome
        else:
            pa = tournament_select(population, params.ks, rng)
            pb = tournament_select(population, params.ks, rng)
            chromosome = crossover(pa.chromosome, pb.chromosome)
        chromosome = _mutated_chromosome(chromosome, instance, rng)
        report = evaluate_chromosome(chromosome, instance, params)
        evals += 1
        child = Individual(chromosome, report.fitness, report)
        victim = replacement_index(population, params.kr, rng)
        if child.fitness < population[victim].fitness:
            population[victim] = child
            if child.fitness < best.fitness:
                best, last_improvement = child, evals
                improvements.append((evals, child.fitness))
        if params.trace_every and evals % params.trace_every == 0:
            trace.append((evals, min(p.fitness for p in population)))

    return RunResult(
        best=best,
        best_fitness=best.fitness,
        last_improvement_eval=last_improvement,
        evaluations=evals,
        report=best.report,
        improvements=improvements,
        population_min_trace=trace,
    )
