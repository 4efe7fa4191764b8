"""Multi-stage scenario tree generation.

A chromosome of ``s + sum(n_3..n_T)`` genes in [0, 1] is mapped onto a
tree with ``n_t`` nodes at stage ``t``:

* the first ``s`` genes send each input path to a terminal node, with the
  same bucketing rule as the single-stage clustering;
* the following blocks, for ``t = T`` down to ``3``, attach each stage-``t``
  node to a stage-``t-1`` parent. Stage-2 nodes hang off the root.

A node's value is the center (median by default) of the stage values of all
paths routed through it, its probability the summed path probabilities.
Chromosomes that leave a node without paths do not describe a tree of the
requested shape and are reported as invalid (``None``).
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_choice
from .centers import CENTERS, DISTANCES, group_centers, pointwise_distance
from .distributions import ScenarioTree
from .ea import EAConfig, UnitIntervalProblem, run
from .exceptions import ConfigurationError, NoValidSolutionError


@dataclass(frozen=True)
class TreeShape:
    """Node counts per non-root stage, e.g. ``(10, 40)`` for a 1/10/40 tree."""

    node_counts: tuple

    def __post_init__(self):
        counts = tuple(int(n) for n in self.node_counts)
        if len(counts) < 2:
            raise ConfigurationError("a tree shape needs at least two non-root stages")
        if any(n < 1 for n in counts):
            raise ConfigurationError(f"node counts must be positive, got {counts}")
        object.__setattr__(self, "node_counts", counts)

    @classmethod
    def parse(cls, text):
        """Parse ``"10,40"``."""
        try:
            return cls(tuple(int(x) for x in str(text).split(",") if x.strip()))
        except ValueError as exc:
            raise ConfigurationError(f"invalid tree shape {text!r}: {exc}") from None

    @property
    def n_stages(self):
        return len(self.node_counts) + 1

    @property
    def n_terminal(self):
        return self.node_counts[-1]

    def chromosome_length(self, n_paths):
        return n_paths + sum(self.node_counts[1:])

    def check_paths(self, paths):
        if paths.n_stages != self.n_stages:
            raise ConfigurationError(
                f"shape {list(self.node_counts)} has {self.n_stages} stages, "
                f"paths have {paths.n_stages}"
            )
        too_big = [n for n in self.node_counts if n > paths.n_paths]
        if too_big:
            raise ConfigurationError(
                f"node counts {too_big} exceed the number of input paths {paths.n_paths}"
            )


@dataclass(frozen=True)
class TreeSpec:
    distance: str = "l1"
    center: str = "median"
    probability_weighted: bool = True

    def __post_init__(self):
        check_choice(self.distance, "distance", DISTANCES)
        check_choice(self.center, "center", CENTERS)


def _bucket(genes, n):
    return np.minimum((genes * n).astype(np.int64), n - 1)


def _route(genes, n_paths, shape):
    """Parent maps and per-stage node index of every path, or ``None`` if a node is empty."""
    counts = shape.node_counts
    terminal = _bucket(genes[:n_paths], counts[-1])
    parents = [None] * len(counts)
    parents[0] = np.zeros(counts[0], dtype=np.int64)
    pos = n_paths
    for t in range(len(counts) - 1, 0, -1):
        parents[t] = _bucket(genes[pos:pos + counts[t]], counts[t - 1])
        pos += counts[t]
    node_at = [None] * len(counts)
    node_at[-1] = terminal
    for t in range(len(counts) - 1, 0, -1):
        node_at[t - 1] = parents[t][node_at[t]]
    for t, n in enumerate(counts):
        if np.count_nonzero(np.bincount(node_at[t], minlength=n)) < n:
            return None
    return parents, node_at


def _node_values(paths, node_at, shape, center):
    return [
        group_centers(paths.paths[:, t], node_at[t], n, paths.probabilities, center)
        for t, n in enumerate(shape.node_counts)
    ]


def _distance(paths, node_at, values, distance, weighted):
    per_path = np.zeros(paths.n_paths)
    for t in range(len(node_at)):
        per_path += pointwise_distance(paths.paths[:, t] - values[t][node_at[t]], distance)
    if weighted:
        return float(paths.probabilities @ per_path)
    return float(per_path.sum())


def map_to_tree(chromosome, paths, shape, center="median"):
    """Build the scenario tree encoded by ``chromosome``; ``None`` if invalid."""
    genes = np.asarray(chromosome, dtype=np.float64).reshape(-1)
    shape.check_paths(paths)
    expected = shape.chromosome_length(paths.n_paths)
    if genes.size != expected:
        raise ValueError(f"chromosome has {genes.size} genes, shape needs {expected}")
    check_choice(center, "center", CENTERS)
    routed = _route(genes, paths.n_paths, shape)
    if routed is None:
        return None
    parents, node_at = routed
    values = _node_values(paths, node_at, shape, center)
    probs = [
        np.bincount(node_at[t], weights=paths.probabilities, minlength=n)
        for t, n in enumerate(shape.node_counts)
    ]
    return ScenarioTree(
        values=(np.array([paths.root_value]), *values),
        probabilities=(np.array([1.0]), *probs),
        parents=(np.array([-1]), *parents),
        routing=node_at[-1],
    )


def tree_distance(tree, paths, distance="l1", probability_weighted=True):
    """Distance between the input paths and the tree trajectories they are routed to.

    Sums the stage-wise distances (``|d|`` for l1, ``d**2`` for l2) over
    stages 2..T, weighting each path by its probability unless
    ``probability_weighted`` is false. The root stage is not compared.
    """
    check_choice(distance, "distance", DISTANCES)
    if tree.routing is None or tree.routing.size != paths.n_paths:
        raise ValueError("tree does not record a terminal node for every input path")
    if tree.n_stages != paths.n_stages:
        raise ValueError(f"tree has {tree.n_stages} stages, paths have {paths.n_stages}")
    node_at = [None] * (tree.n_stages - 1)
    node = tree.routing
    for t in range(tree.n_stages - 1, 0, -1):
        node_at[t - 1] = node
        node = tree.parents[t][node]
    return _distance(paths, node_at, tree.values[1:], distance, probability_weighted)


class TreeProblem(UnitIntervalProblem):
    def __init__(self, paths, shape, spec, sigma=0.1):
        shape.check_paths(paths)
        super().__init__(shape.chromosome_length(paths.n_paths), sigma=sigma)
        self.paths = paths
        self.shape = shape
        self.spec = spec

    def evaluate(self, genotype):
        routed = _route(genotype, self.paths.n_paths, self.shape)
        if routed is None:
            return None
        _, node_at = routed
        values = _node_values(self.paths, node_at, self.shape, self.spec.center)
        return _distance(self.paths, node_at, values, self.spec.distance,
                         self.spec.probability_weighted)


@dataclass
class TreeResult:
    tree: ScenarioTree
    objective: float
    chromosome: np.ndarray
    log: list


def generate_tree(paths, shape, spec=None, ea=None, n_jobs=None):
    """Evolve a scenario tree of the given shape approximating ``paths``."""
    spec = spec or TreeSpec()
    ea = ea or EAConfig()
    problem = TreeProblem(paths, shape, spec)
    try:
        result = run(ea, problem, n_jobs=n_jobs)
    except NoValidSolutionError:
        raise NoValidSolutionError(
            f"no chromosome produced a valid {list(shape.node_counts)} tree from "
            f"{paths.n_paths} paths; try fewer nodes per stage"
        ) from None
    genes = result.best.genotype
    tree = map_to_tree(genes, paths, shape, spec.center)
    return TreeResult(tree=tree, objective=result.best.fitness, chromosome=genes, log=result.log)
