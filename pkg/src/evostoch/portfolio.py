"""Single-stage risk-return portfolio selection.

A portfolio is encoded by two parts: ``g1``, ``b`` real "bucket" values in
[0, 1], and ``g2``, a bit-string marking the selected assets. Decoding hands
each bucket (one ``1/b`` share of the budget) to one selected asset, so
weights are always non-negative multiples of ``1/b`` summing to one.
"""
from dataclasses import dataclass, field

import numpy as np

from .distributions import loss_distribution
from .ea import EAConfig, mutate_unit_genes, run
from .exceptions import ConfigurationError
from .risk import ObjectiveSpec, expectation, risk, weighted_objective


@dataclass(frozen=True)
class PortfolioGenotype:
    g1: np.ndarray
    g2: np.ndarray

    def __post_init__(self):
        g1 = np.asarray(self.g1, dtype=np.float64).reshape(-1)
        g2 = np.asarray(self.g2, dtype=bool).reshape(-1)
        if g1.size < 1:
            raise ValueError("g1 needs at least one bucket")
        if g2.size < 1:
            raise ValueError("g2 needs at least one asset")
        if np.any((g1 < 0) | (g1 > 1)):
            raise ValueError("g1 values must lie in [0, 1]")
        object.__setattr__(self, "g1", g1)
        object.__setattr__(self, "g2", g2)

    @property
    def buckets(self):
        return self.g1.size

    @property
    def n_assets(self):
        return self.g2.size


@dataclass(frozen=True)
class Portfolio:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("portfolio weights must be non-negative and sum to 1")
        object.__setattr__(self, "weights", w)


def decode(genotype):
    """Map a genotype to its portfolio, or ``None`` if no asset is selected.

    With ``m`` selected assets (in index order), a bucket value ``v`` goes
    to slot ``min(floor(v * m), m - 1)``; an asset's weight is its bucket
    count over ``b``.

    >>> g = PortfolioGenotype(
    ...     [0.4893, 0.3377, 0.9001, 0.3692, 0.1112,
    ...      0.7803, 0.3897, 0.2417, 0.4039, 0.0965],
    ...     [1, 1, 0, 0, 1])
    >>> decode(g).weights.tolist()
    [0.3, 0.5, 0.0, 0.0, 0.2]
    """
    selected = np.flatnonzero(genotype.g2)
    m = selected.size
    if m == 0:
        return None
    slots = np.minimum((genotype.g1 * m).astype(np.int64), m - 1)
    counts = np.bincount(slots, minlength=m)
    weights = np.zeros(genotype.n_assets)
    weights[selected] = counts / genotype.buckets
    return Portfolio(weights)


# Constraint checks map a weight vector to a violation magnitude >= 0.

def max_cardinality(k):
    """Violation = number of held assets beyond ``k``."""
    def check(weights):
        return float(max(0, np.count_nonzero(weights) - k))
    check.__name__ = f"max_cardinality({k})"
    return check


def max_weight(limit):
    """Violation = total weight in excess of ``limit`` per asset."""
    def check(weights):
        return float(np.clip(weights - limit, 0.0, None).sum())
    check.__name__ = f"max_weight({limit})"
    return check


def min_expectation(scenarios, target):
    """Violation = shortfall of the expected P&L below ``target``."""
    def check(weights):
        mean = float(scenarios.probabilities @ (scenarios.values @ weights))
        return max(0.0, target - mean)
    check.__name__ = f"min_expectation({target})"
    return check


@dataclass(frozen=True)
class ConstraintSet:
    """Penalty-handled constraints: fitness loses ``penalty_weight * sum(violations)``."""

    constraints: tuple = field(default_factory=tuple)
    penalty_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.penalty_weight > 0:
            raise ConfigurationError("penalty_weight must be positive")

    def violation(self, weights):
        total = 0.0
        for check in self.constraints:
            v = float(check(weights))
            if not v >= 0 or not np.isfinite(v):
                raise ValueError(f"constraint {check!r} returned invalid violation {v}")
            total += v
        return total


NO_CONSTRAINTS = ConstraintSet()


def evaluate(genotype, scenarios, spec, constraints=NO_CONSTRAINTS):
    """Penalized objective of ``genotype``; ``None`` when it does not decode."""
    portfolio = decode(genotype)
    if portfolio is None:
        return None
    dist = loss_distribution(portfolio.weights, scenarios)
    penalty = constraints.penalty_weight * constraints.violation(portfolio.weights)
    return weighted_objective(spec, dist) - penalty


class PortfolioProblem:
    """Variation operators and fitness for the two-part portfolio genotype.

    When ``cardinality`` is set every genotype selects exactly that many
    assets: crossover keeps the parents' common picks and fills up from
    the assets picked by either, and mutation swaps a selected with an
    unselected asset instead of flipping bits.
    """

    maximize = True

    def __init__(self, scenarios, spec, constraints=NO_CONSTRAINTS, buckets=10,
                 cardinality=None, sigma=0.1):
        a = scenarios.n_dims
        if buckets < 1:
            raise ConfigurationError("buckets must be >= 1")
        if cardinality is not None and not 1 <= cardinality <= a:
            raise ConfigurationError(
                f"cardinality must lie in [1, {a}] for {a} assets, got {cardinality}"
            )
        self.scenarios = scenarios
        self.spec = spec
        self.constraints = constraints
        self.buckets = int(buckets)
        self.cardinality = cardinality
        self.sigma = sigma

    @property
    def n_assets(self):
        return self.scenarios.n_dims

    def generate(self, rng):
        g1 = rng.random(self.buckets)
        if self.cardinality is None:
            g2 = rng.random(self.n_assets) < 0.5
        else:
            g2 = np.zeros(self.n_assets, dtype=bool)
            g2[rng.choice(self.n_assets, self.cardinality, replace=False)] = True
        return PortfolioGenotype(g1, g2)

    def evaluate(self, genotype):
        return evaluate(genotype, self.scenarios, self.spec, self.constraints)

    def recombine(self, a, b, rng):
        g1 = np.where(rng.random(self.buckets) < 0.5, a.g1, b.g1)
        if self.cardinality is None:
            g2 = np.where(rng.random(self.n_assets) < 0.5, a.g2, b.g2)
        else:
            g2 = a.g2 & b.g2
            pool = np.flatnonzero(a.g2 ^ b.g2)
            need = self.cardinality - int(g2.sum())
            g2 = g2.copy()
            g2[rng.choice(pool, need, replace=False)] = True
        return PortfolioGenotype(g1, g2)

    def mutate(self, genotype, rng, rate):
        g1 = mutate_unit_genes(genotype.g1, rng, rate, self.sigma)
        g2 = genotype.g2
        if self.cardinality is None:
            flip = rng.random(self.n_assets) < rate
            if flip.any():
                g2 = g2 ^ flip
        else:
            g2 = _swap_mutation(g2, rng, rate)
        if g1 is genotype.g1 and g2 is genotype.g2:
            return genotype
        return PortfolioGenotype(g1, g2)


def _swap_mutation(g2, rng, rate):
    """Each selected asset is swapped for a random unselected one with probability ``rate``."""
    on = np.flatnonzero(g2)
    hits = on[rng.random(on.size) < rate]
    if hits.size == 0 or on.size == g2.size:
        return g2
    g2 = g2.copy()
    for i in hits:
        off = np.flatnonzero(~g2)
        j = off[rng.integers(off.size)]
        g2[i], g2[j] = False, True
    return g2


@dataclass
class PortfolioResult:
    portfolio: Portfolio
    fitness: float
    expectation: float
    risk: float
    objective: float
    genotype: PortfolioGenotype
    log: list


def optimize_portfolio(scenarios, spec=None, constraints=NO_CONSTRAINTS, ea=None,
                       buckets=10, cardinality=None, n_jobs=None):
    """Search for the portfolio maximizing ``E - kappa * rho`` minus penalties.

    ``fitness`` includes constraint penalties; ``objective`` does not.
    """
    spec = spec or ObjectiveSpec()
    ea = ea or EAConfig()
    problem = PortfolioProblem(scenarios, spec, constraints, buckets, cardinality)
    result = run(ea, problem, n_jobs=n_jobs)
    portfolio = decode(result.best.genotype)
    dist = loss_distribution(portfolio.weights, scenarios)
    return PortfolioResult(
        portfolio=portfolio,
        fitness=result.best.fitness,
        expectation=expectation(dist),
        risk=risk(spec, dist),
        objective=weighted_objective(spec, dist),
        genotype=result.best.genotype,
        log=result.log,
    )


__all__ = [
    "ConstraintSet", "Portfolio", "PortfolioGenotype", "PortfolioProblem",
    "PortfolioResult", "decode", "evaluate", "max_cardinality",
    "max_weight", "min_expectation", "optimize_portfolio",
]
