"""Single-stage scenario generation by evolutionary clustering.

A chromosome holds one gene in [0, 1] per input scenario; the gene picks
the output scenario (cluster) the input is merged into. Cluster values are
the per-dimension mean or median of the members, cluster probabilities the
summed member probabilities. The search minimizes the total member-to-center
distance.

Cluster ids returned by :func:`assign_clusters` are 1-based.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_choice
from .centers import CENTERS, DISTANCES, group_centers, pointwise_distance
from .distributions import ScenarioSet
from .ea import EAConfig, UnitIntervalProblem, run
from .exceptions import ConfigurationError


@dataclass(frozen=True)
class ClusteringSpec:
    """How inputs are merged and scored.

    ``distance="l1"`` sums absolute deviations, ``"l2"`` squared deviations;
    both are summed over dimensions with ``dim_weights`` (default all ones).
    With ``probability_weighted`` each cluster's distance is multiplied by
    the cluster probability.
    """

    k: int = 2
    distance: str = "l1"
    center: str = "mean"
    probability_weighted: bool = False
    dim_weights: tuple = None

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError(f"k must be >= 1, got {self.k}")
        check_choice(self.distance, "distance", DISTANCES)
        check_choice(self.center, "center", CENTERS)
        if self.dim_weights is not None:
            w = tuple(float(x) for x in self.dim_weights)
            if any(not x > 0 for x in w):
                raise ConfigurationError("dim_weights must be positive")
            object.__setattr__(self, "dim_weights", w)


def assign_clusters(chromosome, k):
    """Cluster id ``min(floor(gene * k) + 1, k)`` for every gene.

    >>> assign_clusters([0.4387, 0.3816, 0.7655, 0.7952, 0.1869], 2).tolist()
    [1, 1, 2, 2, 1]
    """
    genes = np.asarray(chromosome, dtype=np.float64)
    return np.minimum((genes * k).astype(np.int64), k - 1) + 1


def flip_mutate(chromosome, index):
    """Return a copy with gene ``index`` (0-based) replaced by ``1 - gene``."""
    genes = np.array(chromosome, dtype=np.float64)
    if not -genes.size <= index < genes.size:
        raise IndexError(f"gene index {index} out of range for {genes.size} genes")
    genes[index] = 1.0 - genes[index]
    return genes


@dataclass
class ClusterOutput:
    scenarios: ScenarioSet
    distances: np.ndarray
    objective: float
    ids: np.ndarray


def _check_ids(ids, n, k):
    groups = np.asarray(ids, dtype=np.int64) - 1
    if groups.size != n:
        raise ValueError(f"expected {n} cluster ids, got {groups.size}")
    if groups.min() < 0 or groups.max() >= k:
        raise ValueError(f"cluster ids must lie in 1..{k}")
    return groups


def _cluster_stats(values, probs, groups, spec):
    """Centers, cluster probabilities, per-cluster distances; ``None`` if a cluster is empty.

    ``groups`` are 0-based and assumed in range.
    """
    k = spec.k
    if np.count_nonzero(np.bincount(groups, minlength=k)) < k:
        return None
    n_dims = values.shape[1]
    centers = np.empty((k, n_dims))
    for d in range(n_dims):
        centers[:, d] = group_centers(values[:, d], groups, k, probs, spec.center)
    member_dist = pointwise_distance(values - centers[groups], spec.distance)
    if spec.dim_weights is None:
        member_dist = member_dist.sum(axis=1)
    else:
        if len(spec.dim_weights) != n_dims:
            raise ConfigurationError(
                f"dim_weights has {len(spec.dim_weights)} entries for {n_dims} dimensions"
            )
        member_dist = member_dist @ np.asarray(spec.dim_weights)
    distances = np.bincount(groups, weights=member_dist, minlength=k)
    cluster_p = np.bincount(groups, weights=probs, minlength=k)
    return centers, cluster_p, distances


def _objective(cluster_p, distances, spec):
    if spec.probability_weighted:
        return float(cluster_p @ distances)
    return float(distances.sum())


def build_output(scenarios, ids, spec):
    """Merge ``scenarios`` by cluster id; ``None`` marks an empty cluster."""
    groups = _check_ids(ids, scenarios.n_scenarios, spec.k)
    stats = _cluster_stats(scenarios.values, scenarios.probabilities, groups, spec)
    if stats is None:
        return None
    centers, cluster_p, distances = stats
    return ClusterOutput(
        scenarios=ScenarioSet(centers, cluster_p),
        distances=distances,
        objective=_objective(cluster_p, distances, spec),
        ids=np.asarray(ids, dtype=np.int64),
    )


class ClusterProblem(UnitIntervalProblem):
    def __init__(self, scenarios, spec, sigma=0.1):
        if spec.k > scenarios.n_scenarios:
            raise ConfigurationError(
                f"k={spec.k} exceeds the number of input scenarios {scenarios.n_scenarios}"
            )
        super().__init__(scenarios.n_scenarios, sigma=sigma)
        self.scenarios = scenarios
        self.spec = spec

    def evaluate(self, genotype):
        groups = assign_clusters(genotype, self.spec.k) - 1
        stats = _cluster_stats(self.scenarios.values, self.scenarios.probabilities, groups,
                               self.spec)
        if stats is None:
            return None
        _, cluster_p, distances = stats
        return _objective(cluster_p, distances, self.spec)


@dataclass
class ClusterResult:
    output: ClusterOutput
    chromosome: np.ndarray
    log: list

    @property
    def scenarios(self):
        return self.output.scenarios

    @property
    def objective(self):
        return self.output.objective


def generate_scenarios(scenarios, spec=None, ea=None, n_jobs=None):
    """Evolve a ``spec.k``-scenario approximation of ``scenarios``."""
    spec = spec or ClusteringSpec()
    ea = ea or EAConfig()
    problem = ClusterProblem(scenarios, spec)
    result = run(ea, problem, n_jobs=n_jobs)
    genes = result.best.genotype
    output = build_output(scenarios, assign_clusters(genes, spec.k), spec)
    return ClusterResult(output=output, chromosome=genes, log=result.log)
