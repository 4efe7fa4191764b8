"""Generic (mu + lambda) evolutionary optimizer.

The loop is the textbook one::

    P <- generate initial population; evaluate(P)
    while not terminated:
        P'  <- recombine(P)
        P'' <- mutate(P')
        evaluate(P'')
        P   <- select(P | P'')

Problems plug in through four callables (see :class:`Problem`). Fitness
values are plain floats; ``None`` marks an invalid individual, which ranks
behind every valid one and is therefore dropped by truncation selection as
soon as enough valid candidates exist.
"""
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Protocol

import numpy as np

from .exceptions import ConfigurationError, NoValidSolutionError

MAX_INIT_ATTEMPTS = 100
IMPROVEMENT_TOL = 1e-12

# Stream tags; keep the random streams for different purposes disjoint.
_INIT_STREAM = 1
_GENERATION_STREAM = 2


@dataclass(frozen=True)
class EAConfig:
    population_size: int = 50
    offspring_count: int = 50
    max_generations: int = 300
    stagnation_limit: int = 100
    mutation_rate: float = 0.1
    crossover_rate: float = 0.9
    master_seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigurationError("population_size must be >= 2")
        if self.offspring_count < 1:
            raise ConfigurationError("offspring_count must be >= 1")
        if self.max_generations < 0:
            raise ConfigurationError("max_generations must be >= 0")
        if self.stagnation_limit < 1:
            raise ConfigurationError("stagnation_limit must be >= 1")
        for name in ("mutation_rate", "crossover_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ConfigurationError(f"{name} must lie in [0, 1], got {rate}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigurationError("master_seed must be an unsigned 64-bit integer")


@dataclass
class Individual:
    genotype: Any
    fitness: Optional[float] = None
    birth: int = 0
    index: int = 0

    @property
    def valid(self):
        return self.fitness is not None


@dataclass(frozen=True)
class GenerationRecord:
    """One line of the generation log.

    ``best`` and ``mean`` are taken over the valid members of the population
    after selection; ``invalid_count`` counts invalid individuals among those
    evaluated in this generation.
    """

    generation: int
    best: float
    mean: float
    invalid_count: int

    def to_json(self):
        return json.dumps(asdict(self))


@dataclass
class EAResult:
    best: Individual
    log: list = field(default_factory=list)
    n_evaluations: int = 0

    @property
    def generations(self):
        return len(self.log) - 1

    def log_lines(self):
        return "\n".join(r.to_json() for r in self.log)


class Problem(Protocol):
    """What the engine needs from a problem.

    ``evaluate`` must be pure: it may be called concurrently.
    """

    maximize: bool

    def generate(self, rng: np.random.Generator) -> Any: ...

    def evaluate(self, genotype: Any) -> Optional[float]: ...

    def recombine(self, a: Any, b: Any, rng: np.random.Generator) -> Any: ...

    def mutate(self, genotype: Any, rng: np.random.Generator, rate: float) -> Any: ...


def _rank_key(ind, maximize):
    if ind.fitness is None:
        return (1, 0.0, ind.birth, ind.index)
    score = -ind.fitness if maximize else ind.fitness
    return (0, score, ind.birth, ind.index)


def select(individuals, population_size, maximize=False):
    """Truncation selection: keep the ``population_size`` best individuals.

    Ties go to the older individual, then to the lower insertion index.
    Invalid individuals rank last.
    """
    ranked = sorted(individuals, key=lambda ind: _rank_key(ind, maximize))
    return ranked[:population_size]


def _is_better(a, b, maximize):
    if b is None:
        return True
    return a - b > IMPROVEMENT_TOL if maximize else b - a > IMPROVEMENT_TOL


def _coerce_fitness(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


class _Engine:
    def __init__(self, config, problem, n_jobs):
        self.config = config
        self.problem = problem
        self.maximize = bool(getattr(problem, "maximize", False))
        self.n_jobs = n_jobs
        self.counter = 0
        self.n_evaluations = 0

    def stream(self, tag, number):
        # Philox keyed by (seed, tag | number): independent streams without hashing.
        key = np.array([self.config.master_seed, (tag << 56) | number], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def evaluate(self, individuals):
        genotypes = [ind.genotype for ind in individuals]
        if self.n_jobs and self.n_jobs > 1 and len(genotypes) > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                results = list(pool.map(self.problem.evaluate, genotypes))
        else:
            results = [self.problem.evaluate(g) for g in genotypes]
        for ind, fit in zip(individuals, results):
            ind.fitness = _coerce_fitness(fit)
        self.n_evaluations += len(individuals)
        return sum(1 for ind in individuals if ind.fitness is None)

    def initial_population(self):
        for attempt in range(MAX_INIT_ATTEMPTS):
            rng = self.stream(_INIT_STREAM, attempt)
            population = []
            for _ in range(self.config.population_size):
                self.counter += 1
                population.append(
                    Individual(self.problem.generate(rng), birth=0, index=self.counter)
                )
            n_invalid = self.evaluate(population)
            if n_invalid < len(population):
                return population, n_invalid
        raise NoValidSolutionError(
            f"no valid individual in {MAX_INIT_ATTEMPTS} initial populations"
        )

    def offspring(self, population, generation):
        cfg = self.config
        rng = self.stream(_GENERATION_STREAM, generation)
        n = len(population)
        first = rng.integers(0, n, size=cfg.offspring_count)
        second = rng.integers(0, n - 1, size=cfg.offspring_count)
        second += second >= first
        children = []
        for i, j in zip(first, second):
            self.counter += 1
            a, b = population[i].genotype, population[j].genotype
            if rng.random() < cfg.crossover_rate:
                child = self.problem.recombine(a, b, rng)
            else:
                child = a
            child = self.problem.mutate(child, rng, cfg.mutation_rate)
            children.append(Individual(child, birth=generation, index=self.counter))
        return children

    def record(self, generation, population, n_invalid):
        valid = [ind.fitness for ind in population if ind.fitness is not None]
        best = max(valid) if self.maximize else min(valid)
        return GenerationRecord(generation, best, float(np.mean(valid)), n_invalid)


def run(config, problem, n_jobs=None):
    """Run the evolutionary loop and return an :class:`EAResult`.

    Terminates after ``config.max_generations`` generations or after
    ``config.stagnation_limit`` consecutive generations without the best
    fitness improving by more than 1e-12. Results depend only on
    ``config`` (including its seed) and ``problem``; ``n_jobs`` threads may
    evaluate offspring without changing them.
    """
    engine = _Engine(config, problem, n_jobs)
    population, n_invalid = engine.initial_population()
    population = select(population, config.population_size, engine.maximize)
    log = [engine.record(0, population, n_invalid)]
    best_fitness = log[0].best
    stagnant = 0

    for generation in range(1, config.max_generations + 1):
        children = engine.offspring(population, generation)
        n_invalid = engine.evaluate(children)
        population = select(population + children, config.population_size, engine.maximize)
        log.append(engine.record(generation, population, n_invalid))
        if _is_better(log[-1].best, best_fitness, engine.maximize):
            best_fitness = log[-1].best
            stagnant = 0
        else:
            stagnant += 1
            if stagnant >= config.stagnation_limit:
                break

    return EAResult(best=population[0], log=log, n_evaluations=engine.n_evaluations)


class UnitIntervalProblem:
    """Real-valued genotype on ``[0, 1]^n_genes``.

    Uniform crossover; each gene mutates with probability ``rate``, either
    by a clipped Gaussian step of width ``sigma`` or by the flip
    ``v -> 1 - v`` (chosen with probability ``flip_probability``).
    Subclasses override :meth:`evaluate`; alternatively pass ``fitness``.
    """

    maximize = False

    def __init__(self, n_genes, fitness=None, sigma=0.1, flip_probability=0.5,
                 maximize=False):
        self.n_genes = int(n_genes)
        self.fitness = fitness
        self.sigma = sigma
        self.flip_probability = flip_probability
        self.maximize = maximize

    def generate(self, rng):
        return rng.random(self.n_genes)

    def evaluate(self, genotype):
        return self.fitness(genotype)

    def recombine(self, a, b, rng):
        return np.where(rng.random(a.size) < 0.5, a, b)

    def mutate(self, genotype, rng, rate):
        return mutate_unit_genes(genotype, rng, rate, self.sigma, self.flip_probability)


def mutate_unit_genes(genes, rng, rate, sigma=0.1, flip_probability=0.5):
    """Flip or Gaussian-perturb each gene of a ``[0, 1]`` vector with probability ``rate``."""
    hit = rng.random(genes.size) < rate
    if not hit.any():
        return genes
    flip = rng.random(genes.size) < flip_probability
    step = rng.normal(0.0, sigma, genes.size)
    out = np.where(flip, 1.0 - genes, np.clip(genes + step, 0.0, 1.0))
    return np.where(hit, out, genes)
