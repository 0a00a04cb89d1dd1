"""Genetic optimizer over blade geometries, with surrogate-seeded variant.

run_ga evolves real-vector genomes against the simulator; run_sao builds
its first population from the forest prediction and the tree leaf designs
for the requirement, then runs the same GA under the same budget.  Budgets
count simulator calls exactly: infeasible designs score zero fitness
instead of being resampled, elites carry their known fitness forward, and a
generation hitting the budget is truncated mid-stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import ConfigurationError
from .solver import BladeGeometry, Requirement, SolverOptions, evaluate
from .space import DesignSpaceConfig, Genome, decode, encode, gene_bounds
from .surrogate import (
    RandomForest,
    RegressionTree,
    decode_target,
    leaf_records,
    predict_forest,
)

# Operating points exercised by the comparison harness and benchmark script:
# (thrust [N], speed [m/s], rpm) spanning light-to-heavy loading.
BENCHMARK_REQUIREMENTS = (
    Requirement(51783.0, 7.5, 3551.0),
    Requirement(127769.0, 12.5, 699.0),
    Requirement(391825.0, 12.5, 719.0),
    Requirement(205328.0, 19.5, 1096.0),
    Requirement(301149.0, 7.5, 1215.0),
    Requirement(314350.0, 16.0, 777.0),
    Requirement(31669.0, 17.5, 2789.0),
    Requirement(476713.0, 15.5, 2975.0),
)

BLEND_ALPHA = 0.5


@dataclass(frozen=True)
class GaConfig:
    """Genetic-algorithm controls."""

    population_size: int = 20
    eval_budget: int = 400
    tournament_size: int = 3
    crossover_prob: float = 0.9
    mutation_prob: float = 0.2
    mutation_sigma_frac: float = 0.1
    elite_count: int = 2
    rng_seed: int = 0

    def validate(self) -> None:
        if self.population_size < 2:
            raise ConfigurationError("population_size must be >= 2")
        if self.eval_budget < self.population_size:
            raise ConfigurationError("eval_budget must be >= population_size")
        if not (1 <= self.tournament_size <= self.population_size):
            raise ConfigurationError(
                "tournament_size must be in [1, population_size]")
        for name in ("crossover_prob", "mutation_prob"):
            p = getattr(self, name)
            if not (0.0 <= p <= 1.0):
                raise ConfigurationError(f"{name} must be in [0, 1], got {p}")
        if self.mutation_sigma_frac < 0.0:
            raise ConfigurationError("mutation_sigma_frac must be >= 0")
        if not (0 <= self.elite_count < self.population_size):
            raise ConfigurationError("elite_count must be < population_size")


@dataclass
class OptimizationTrace:
    """Per-evaluation log: (evaluation_index, candidate_eta, best_so_far)."""

    entries: list[tuple[int, float, float]]
    method_tag: str
    requirement: Requirement


@dataclass
class OptimizationResult:
    best_geometry: BladeGeometry | None
    best_efficiency: float
    trace: OptimizationTrace
    evaluations_used: int


def _genome_key(genome: Genome):
    return (genome.values, genome.blade_index)


def _random_genome(rng: np.random.Generator, bounds, blade_count_n: int) -> Genome:
    values = tuple(float(rng.uniform(lo, hi)) for lo, hi in bounds)
    return Genome(values=values, blade_index=int(rng.integers(blade_count_n)))


class _BudgetedEvaluator:
    """Counts simulator calls and maintains the trace and incumbent."""

    def __init__(self, req, space, options, budget, method_tag):
        self.req = req
        self.space = space
        self.options = options
        self.budget = budget
        self.used = 0
        self.entries: list[tuple[int, float, float]] = []
        self.best_eta = 0.0
        self.best_geometry: BladeGeometry | None = None
        self.method_tag = method_tag

    @property
    def exhausted(self) -> bool:
        return self.used >= self.budget

    def __call__(self, genome: Genome) -> float:
        geometry = decode(genome, self.space)
        perf = evaluate(geometry, self.req, self.options)
        return self.record(geometry, perf.efficiency if perf.feasible else 0.0)

    def record(self, geometry: BladeGeometry, eta: float) -> float:
        self.used += 1
        if eta > self.best_eta:
            self.best_eta = eta
            self.best_geometry = geometry
        self.entries.append((self.used, eta, self.best_eta))
        return eta

    def result(self) -> OptimizationResult:
        trace = OptimizationTrace(entries=self.entries,
                                  method_tag=self.method_tag,
                                  requirement=self.req)
        return OptimizationResult(best_geometry=self.best_geometry,
                                  best_efficiency=self.best_eta,
                                  trace=trace,
                                  evaluations_used=self.used)


def _tournament(rng, fitness, k: int) -> int:
    picks = rng.choice(len(fitness), size=k, replace=False)
    best = picks[0]
    for i in picks[1:]:
        if fitness[i] > fitness[best]:
            best = i
    return int(best)


def run_ga(req: Requirement, initial_seeds: list[BladeGeometry],
           cfg: GaConfig, space: DesignSpaceConfig,
           solver_options: SolverOptions = SolverOptions(),
           method_tag: str = "GA") -> OptimizationResult:
    """Generational GA: tournament selection, blend crossover, Gaussian mutation.

    The first population takes the (deduplicated) seed geometries and tops
    up with uniform random genomes.  Exactly cfg.eval_budget simulator calls
    are spent; all-infeasible runs return best_efficiency 0 with no geometry.
    """
    req.validate()
    cfg.validate()
    space.validate()
    rng = np.random.default_rng(cfg.rng_seed)
    bounds = gene_bounds(space)
    sigmas = [cfg.mutation_sigma_frac * (hi - lo) for lo, hi in bounds]
    n_blade_choices = len(space.blade_counts)

    population: list[Genome] = []
    seen = set()
    for geom in initial_seeds:
        genome = encode(geom, space)
        key = _genome_key(genome)
        if key not in seen:
            seen.add(key)
            population.append(genome)
    population = population[:cfg.population_size]
    while len(population) < cfg.population_size:
        population.append(_random_genome(rng, bounds, n_blade_choices))

    sim = _BudgetedEvaluator(req, space, solver_options, cfg.eval_budget,
                             method_tag)

    fitness = []
    evaluated: list[Genome] = []
    for genome in population:
        if sim.exhausted:
            break
        fitness.append(sim(genome))
        evaluated.append(genome)
    population = evaluated

    while not sim.exhausted and population:
        order = sorted(range(len(population)), key=lambda i: -fitness[i])
        elite_n = min(cfg.elite_count, len(population))
        elites = [population[order[i]] for i in range(elite_n)]
        elite_fit = [fitness[order[i]] for i in range(elite_n)]

        children: list[Genome] = []
        while len(children) < cfg.population_size - elite_n:
            p1 = population[_tournament(rng, fitness, min(cfg.tournament_size,
                                                          len(population)))]
            p2 = population[_tournament(rng, fitness, min(cfg.tournament_size,
                                                          len(population)))]
            if rng.random() < cfg.crossover_prob:
                values = []
                for a, b in zip(p1.values, p2.values):
                    lo, hi = min(a, b), max(a, b)
                    spread = BLEND_ALPHA * (hi - lo)
                    values.append(float(rng.uniform(lo - spread, hi + spread)))
                blade_index = p1.blade_index if rng.random() < 0.5 else p2.blade_index
            else:
                values = list(p1.values)
                blade_index = p1.blade_index
            for g in range(4):
                if rng.random() < cfg.mutation_prob:
                    values[g] = float(values[g] + rng.normal(0.0, sigmas[g]))
            if rng.random() < cfg.mutation_prob:
                blade_index = int(rng.integers(n_blade_choices))
            children.append(Genome(values=tuple(values), blade_index=blade_index))

        child_fitness = []
        survived = []
        for genome in children:
            if sim.exhausted:
                break
            child_fitness.append(sim(genome))
            survived.append(genome)

        population = elites + survived
        fitness = elite_fit + child_fitness

    return sim.result()


def sao_seeds(forest: RandomForest, tree: RegressionTree, train_data: Dataset,
              req: Requirement, k: int) -> list[BladeGeometry]:
    """Surrogate-derived starting designs, best predicted/stored eta first.

    Pool = the decoded forest prediction (scored by its predicted eta) plus
    every design on the tree leaf the requirement routes to (scored by its
    stored eta), sorted descending; the forest candidate wins exact ties.
    """
    if k < 1:
        raise ConfigurationError(f"seed count k must be >= 1, got {k}")
    cfg = train_data.generation_config
    forest_geom, forest_eta = decode_target(predict_forest(forest, req), cfg)
    pool: list[tuple[float, BladeGeometry]] = [(forest_eta, forest_geom)]
    for rec in leaf_records(tree, req, train_data):
        pool.append((rec.efficiency, rec.geometry))
    pool.sort(key=lambda pair: -pair[0])
    seeds: list[BladeGeometry] = []
    seen = set()
    for _, geom in pool:
        key = (geom.blade_count, geom.diameter, geom.hub_diameter,
               geom.chord_root, geom.taper_exp, geom.section_drag_coeff)
        if key in seen:
            continue
        seen.add(key)
        seeds.append(geom)
        if len(seeds) == k:
            break
    return seeds


def run_sao(req: Requirement, forest: RandomForest, tree: RegressionTree,
            train_data: Dataset, cfg: GaConfig, space: DesignSpaceConfig,
            solver_options: SolverOptions = SolverOptions()) -> OptimizationResult:
    """GA with the first population seeded from the surrogates."""
    seeds = sao_seeds(forest, tree, train_data, req, cfg.population_size)
    return run_ga(req, seeds, cfg, space, solver_options=solver_options,
                  method_tag="SAO")


def brute_force(req: Requirement, designs: list[BladeGeometry],
                solver_options: SolverOptions = SolverOptions()) -> OptimizationResult:
    """Evaluate every design; ties keep the earliest. Oracle for small spaces."""
    if not designs:
        raise ConfigurationError("brute_force needs a nonempty design list")
    sim = _BudgetedEvaluator(req, None, solver_options, len(designs), "BRUTE")
    for geom in designs:
        perf = evaluate(geom, req, solver_options)
        sim.record(geom, perf.efficiency if perf.feasible else 0.0)
    return sim.result()


def enumeration_grid(space: DesignSpaceConfig, blade_count: int = 4,
                     diameter_count: int = 3,
                     hub_ratio_count: int = 3) -> list[BladeGeometry]:
    """Small exhaustive geometry grid: diameters x chord catalog x hub ratios.

    Defaults give 3 x 9 x 3 = 81 designs at fixed blade count, matching the
    oracle protocol used to cross-check the GA.
    """
    diameters = np.linspace(*space.diameter_range, diameter_count)
    hub_ratios = np.linspace(*space.hub_ratio_range, hub_ratio_count)
    designs = []
    for d in diameters:
        for chord_root, taper_exp in space.chord_catalog:
            for hr in hub_ratios:
                designs.append(BladeGeometry(
                    blade_count=blade_count,
                    diameter=float(d),
                    hub_diameter=float(hr * d),
                    chord_root=chord_root,
                    taper_exp=taper_exp,
                ))
    return designs


def write_trace(result: OptimizationResult, path, seed: int) -> None:
    """Trace CSV with a one-line provenance comment header."""
    trace = result.trace
    req = trace.requirement
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# method=%s requirement=%.17g,%.17g,%.17g seed=%d\n" % (
            trace.method_tag, req.thrust_req, req.ship_speed, req.rpm, seed))
        fh.write("eval_index,candidate_eta,best_so_far\n")
        for index, eta, best in trace.entries:
            fh.write("%d,%.17g,%.17g\n" % (index, eta, best))


def load_trace(path) -> OptimizationTrace:
    """Inverse of write_trace (seed is in the comment, not the object)."""
    with open(path, encoding="utf-8") as fh:
        comment = fh.readline().strip()
        if not comment.startswith("# method="):
            raise ValueError(f"{path}: missing trace comment header")
        fields = dict(part.split("=", 1) for part in comment[2:].split(" "))
        thrust, speed, rpm = (float(v) for v in fields["requirement"].split(","))
        header = fh.readline().strip()
        if header != "eval_index,candidate_eta,best_so_far":
            raise ValueError(f"{path}: bad column header {header!r}")
        entries = []
        for line in fh:
            if not line.strip():
                continue
            i, eta, best = line.strip().split(",")
            entries.append((int(i), float(eta), float(best)))
    return OptimizationTrace(entries=entries, method_tag=fields["method"],
                             requirement=Requirement(thrust, speed, rpm))
