"""Genetic search for test vectors whose trajectories stay apart.

Plain generational GA: fitness-proportional (roulette) selection, a
reproduction quota of selected copies, one-point crossover for the rest,
and per-individual single-gene uniform mutation. Genes are log10
frequencies so mutation explores the band evenly. The best-so-far
individual is tracked outside the population (no elitism inside it).

Reproducibility: the run seed feeds a SeedSequence that spawns one
child stream per generation; all stochastic draws happen on that
single stream in a fixed order, and fitness evaluation is pure, so
results are identical for any worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SimulationError
from .faultlib import FaultConfig
from .netlist import Circuit
from .trajectory import TestVector, build_trajectories, count_intersections

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 128
    generations: int = 15
    reproduction_rate: float = 0.5
    mutation_rate: float = 0.4
    n_frequencies: int = 2
    f_min: float = 0.01
    f_max: float = 100.0
    seed: int = 1

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError("population_size must be at least 2")
        if self.generations < 0:
            raise ConfigError("generations must be non-negative")
        for rate_name in ("reproduction_rate", "mutation_rate"):
            rate = getattr(self, rate_name)
            if not 0.0 <= rate <= 1.0:
                raise ConfigError(f"{rate_name} must lie in [0, 1], got {rate}")
        if self.n_frequencies < 1:
            raise ConfigError("n_frequencies must be at least 1")
        if not (0.0 < self.f_min < self.f_max):
            raise ConfigError(
                f"need 0 < f_min < f_max, got {self.f_min}..{self.f_max}"
            )
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def bounds(self) -> tuple[float, float]:
        """Gene bounds in log10-frequency space."""
        return (float(np.log10(self.f_min)), float(np.log10(self.f_max)))


@dataclass(frozen=True)
class Chromosome:
    """Gene vector in log10-frequency space, clamped to its bounds."""

    genes: tuple[float, ...]
    bounds: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.bounds
        if any(g < lo or g > hi for g in self.genes):
            raise ValueError("gene out of bounds")

    def decode(self) -> TestVector:
        return TestVector(tuple(10.0**g for g in self.genes))


@dataclass(frozen=True)
class GaRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_frequencies: tuple[float, ...]


@dataclass(frozen=True)
class GaLog:
    records: tuple[GaRecord, ...]
    best_vector: TestVector
    best_fitness: float
    best_intersections: int | None
    seed: int


def fitness_from_intersections(intersections: int) -> float:
    return 1.0 / (intersections + 1)


def fitness(
    tv: TestVector,
    circuit: Circuit,
    config: FaultConfig,
    tol: float = 1e-6,
    origin_tol: float | None = None,
) -> float:
    """1/(I+1) for the trajectory intersection count I at this test vector.

    A vector the solver cannot evaluate scores 0.0 so the search keeps
    going; the event is logged.
    """
    try:
        trajectories = build_trajectories(circuit, config, tv)
    except SimulationError as exc:
        logger.warning("fitness=0 for %s: %s", tv.frequencies, exc)
        return 0.0
    intersections, _ = count_intersections(trajectories, tol, origin_tol)
    return fitness_from_intersections(intersections)


def roulette_select(population, fitnesses, rng: np.random.Generator) -> int:
    """Index drawn with probability fitness[i] / sum(fitness).

    Falls back to a uniform draw when every fitness is zero.
    """
    weights = np.asarray(fitnesses, dtype=float)
    if len(weights) != len(population):
        raise ValueError("fitness list does not match population size")
    if np.any(weights < 0.0):
        raise ValueError("fitnesses must be non-negative")
    total = float(weights.sum())
    if total <= 0.0:
        return int(rng.integers(len(population)))
    cumulative = np.cumsum(weights)
    draw = rng.random() * total
    return min(int(np.searchsorted(cumulative, draw, side="right")), len(population) - 1)


def _crossover(parent_a: Chromosome, parent_b: Chromosome, rng) -> Chromosome:
    n = len(parent_a.genes)
    if n == 1:
        return parent_a
    cut = int(rng.integers(1, n))
    return Chromosome(parent_a.genes[:cut] + parent_b.genes[cut:], parent_a.bounds)


def step_generation(
    population: list[Chromosome],
    fitnesses,
    config: GaConfig,
    rng: np.random.Generator,
) -> list[Chromosome]:
    """One generational step: selected copies, crossover children, mutation."""
    size = len(population)
    if size != config.population_size:
        raise ValueError("population size does not match the configuration")
    n_copies = round(config.reproduction_rate * size)

    offspring: list[Chromosome] = []
    for _ in range(n_copies):
        offspring.append(population[roulette_select(population, fitnesses, rng)])
    for _ in range(size - n_copies):
        parent_a = population[roulette_select(population, fitnesses, rng)]
        parent_b = population[roulette_select(population, fitnesses, rng)]
        offspring.append(_crossover(parent_a, parent_b, rng))

    lo, hi = config.bounds
    mutated: list[Chromosome] = []
    for individual in offspring:
        if rng.random() < config.mutation_rate:
            gene_index = int(rng.integers(len(individual.genes)))
            genes = list(individual.genes)
            genes[gene_index] = float(rng.uniform(lo, hi))
            mutated.append(Chromosome(tuple(genes), individual.bounds))
        else:
            mutated.append(individual)
    return mutated


def _evaluate(population, circuit, config, tol, origin_tol, workers) -> list[float]:
    vectors = [individual.decode() for individual in population]
    if workers <= 1:
        return [fitness(tv, circuit, config, tol, origin_tol) for tv in vectors]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(
            pool.map(lambda tv: fitness(tv, circuit, config, tol, origin_tol), vectors)
        )


def run_ga(
    circuit: Circuit,
    fault_config: FaultConfig,
    ga_config: GaConfig,
    tol: float = 1e-6,
    origin_tol: float | None = None,
    workers: int = 1,
) -> tuple[TestVector, GaLog]:
    """Evolve test vectors for a fixed number of generations.

    Returns the best-so-far vector and the full per-generation log.
    """
    seeds = np.random.SeedSequence(ga_config.seed).spawn(ga_config.generations + 1)
    bounds = ga_config.bounds
    init_rng = np.random.Generator(np.random.PCG64(seeds[0]))
    genes = init_rng.uniform(
        bounds[0], bounds[1], size=(ga_config.population_size, ga_config.n_frequencies)
    )
    population = [Chromosome(tuple(row.tolist()), bounds) for row in genes]
    fitnesses = _evaluate(population, circuit, fault_config, tol, origin_tol, workers)

    best_index = int(np.argmax(fitnesses))
    best_fitness = fitnesses[best_index]
    best = population[best_index]
    records = [
        GaRecord(0, best_fitness, float(np.mean(fitnesses)), best.decode().frequencies)
    ]

    for generation in range(1, ga_config.generations + 1):
        rng = np.random.Generator(np.random.PCG64(seeds[generation]))
        population = step_generation(population, fitnesses, ga_config, rng)
        fitnesses = _evaluate(
            population, circuit, fault_config, tol, origin_tol, workers
        )
        gen_best = int(np.argmax(fitnesses))
        if fitnesses[gen_best] > best_fitness:
            best_fitness = fitnesses[gen_best]
            best = population[gen_best]
        records.append(
            GaRecord(
                generation,
                best_fitness,
                float(np.mean(fitnesses)),
                best.decode().frequencies,
            )
        )

    best_vector = best.decode()
    if best_fitness > 0.0:
        intersections, _ = count_intersections(
            build_trajectories(circuit, fault_config, best_vector), tol, origin_tol
        )
    else:
        intersections = None
    log = GaLog(tuple(records), best_vector, best_fitness, intersections, ga_config.seed)
    return best_vector, log


def write_ga_log_csv(path, log: GaLog, frequency_scale: float = 1.0) -> None:
    """``generation,best_fitness,mean_fitness,best_f1,...`` rows.

    ``frequency_scale`` divides the logged frequencies (CLI unit echo).
    """
    n = len(log.best_vector.frequencies)
    header = "generation,best_fitness,mean_fitness," + ",".join(
        f"best_f{i + 1}" for i in range(n)
    )
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for record in log.records:
            freqs = ",".join(
                f"{f / frequency_scale:.17g}" for f in record.best_frequencies
            )
            fh.write(
                f"{record.generation},{record.best_fitness:.17g},"
                f"{record.mean_fitness:.17g},{freqs}\n"
            )
