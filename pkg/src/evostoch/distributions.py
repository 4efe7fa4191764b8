"""Discrete probability objects shared by the solvers.

All containers copy their inputs into read-only float64 arrays, so they can
be handed to concurrent fitness evaluations without defensive copies.
"""
from dataclasses import dataclass, field

import numpy as np

from ._validation import PROB_TOL, check_matrix, check_probabilities, frozen_array


@dataclass(frozen=True)
class ScenarioSet:
    """Finite single-stage distribution: ``s`` scenarios over ``a`` dimensions.

    Parameters
    ----------
    values : array-like of shape (s, a)
        One scenario per row, e.g. the joint returns of ``a`` assets.
    probabilities : array-like of shape (s,), optional
        Scenario probabilities. Uniform when omitted.
    """

    values: np.ndarray
    probabilities: np.ndarray = None

    def __post_init__(self):
        values = check_matrix(self.values)
        p = check_probabilities(self.probabilities, values.shape[0])
        object.__setattr__(self, "values", frozen_array(values))
        object.__setattr__(self, "probabilities", frozen_array(p))

    @property
    def n_scenarios(self):
        return self.values.shape[0]

    @property
    def n_dims(self):
        return self.values.shape[1]

    def mean(self):
        return self.probabilities @ self.values


@dataclass(frozen=True)
class LossDistribution:
    """Discrete P&L distribution of a portfolio.

    ``outcomes`` are profits: a positive entry is a gain. Risk measures that
    speak of losses work on the negated outcomes.
    """

    outcomes: np.ndarray
    probabilities: np.ndarray = None

    def __post_init__(self):
        o = np.asarray(self.outcomes, dtype=np.float64).reshape(-1)
        if o.size == 0 or not np.all(np.isfinite(o)):
            raise ValueError("outcomes must be a non-empty finite vector")
        p = check_probabilities(self.probabilities, o.size)
        object.__setattr__(self, "outcomes", frozen_array(o))
        object.__setattr__(self, "probabilities", frozen_array(p))

    def __len__(self):
        return self.outcomes.size


def loss_distribution(portfolio, scenarios):
    """Return the P&L distribution ``S @ x`` of ``portfolio`` under ``scenarios``.

    Examples
    --------
    >>> S = ScenarioSet([[0.01, 0.02, 0.03, 0.04, 0.05]])
    >>> loss_distribution([0.3, 0.5, 0.0, 0.0, 0.2], S).outcomes
    array([0.023])
    """
    x = np.asarray(portfolio, dtype=np.float64).reshape(-1)
    if x.size != scenarios.n_dims:
        raise ValueError(
            f"portfolio has {x.size} weights, expected a={scenarios.n_dims}"
        )
    if abs(x.sum() - 1.0) > PROB_TOL:
        raise ValueError(f"portfolio weights sum to {x.sum():.12g}, expected 1")
    return LossDistribution(scenarios.values @ x, scenarios.probabilities)


@dataclass(frozen=True)
class ScenarioPathMatrix:
    """Sampled univariate paths of a multi-stage process.

    ``paths[i, j]`` is the value of path ``i`` at stage ``j + 2``; stage 1 is
    the deterministic root holding ``root_value``.
    """

    paths: np.ndarray
    probabilities: np.ndarray = None
    root_value: float = 0.0

    def __post_init__(self):
        paths = check_matrix(self.paths, name="paths")
        if paths.shape[1] < 2:
            raise ValueError(
                "paths need at least two non-root stages (T >= 3), "
                f"got {paths.shape[1]} column(s)"
            )
        p = check_probabilities(self.probabilities, paths.shape[0])
        object.__setattr__(self, "paths", frozen_array(paths))
        object.__setattr__(self, "probabilities", frozen_array(p))
        object.__setattr__(self, "root_value", float(self.root_value))

    @property
    def n_paths(self):
        return self.paths.shape[0]

    @property
    def n_stages(self):
        """Number of stages T including the root."""
        return self.paths.shape[1] + 1


@dataclass(frozen=True)
class ScenarioTree:
    """Stage-indexed scenario tree.

    ``values[t]``, ``probabilities[t]`` and ``parents[t]`` describe the nodes
    of stage ``t + 1`` (index 0 is the root stage). ``parents[t][j]`` indexes
    into stage ``t``; the root's parent is -1. Each node has exactly one
    parent, so a node's history is its root path and non-anticipativity holds
    by construction.

    ``routing`` optionally records, for each input path the tree was built
    from, the index of the terminal node it was assigned to.
    """

    values: tuple
    probabilities: tuple
    parents: tuple
    routing: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        if not (len(self.values) == len(self.probabilities) == len(self.parents)):
            raise ValueError("values, probabilities and parents need one entry per stage")
        if len(self.values) < 2:
            raise ValueError("a scenario tree needs at least two stages")
        values = tuple(frozen_array(np.reshape(v, -1)) for v in self.values)
        probs = tuple(frozen_array(np.reshape(p, -1)) for p in self.probabilities)
        parents = tuple(frozen_array(np.reshape(a, -1), np.int64) for a in self.parents)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "parents", parents)
        if self.routing is not None:
            routing = frozen_array(np.reshape(self.routing, -1), np.int64)
            if routing.size and (routing.min() < 0 or routing.max() >= values[-1].size):
                raise ValueError("routing refers to a non-existent terminal node")
            object.__setattr__(self, "routing", routing)
        self._check()

    def _check(self):
        if self.values[0].size != 1 or abs(self.probabilities[0][0] - 1.0) > PROB_TOL:
            raise ValueError("stage 1 must hold a single root node with probability 1")
        for t, (v, p, a) in enumerate(zip(self.values, self.probabilities, self.parents)):
            if not (v.size == p.size == a.size) or v.size == 0:
                raise ValueError(f"stage {t + 1}: inconsistent node arrays")
            if not np.all(np.isfinite(v)) or np.any(p < 0):
                raise ValueError(f"stage {t + 1}: invalid values or probabilities")
            if abs(p.sum() - 1.0) > PROB_TOL:
                raise ValueError(f"stage {t + 1}: probabilities sum to {p.sum():.12g}")
            if t == 0:
                continue
            n_prev = self.values[t - 1].size
            if a.min() < 0 or a.max() >= n_prev:
                raise ValueError(f"stage {t + 1}: parent index out of range")
            child_mass = np.bincount(a, weights=p, minlength=n_prev)
            if np.any(np.abs(child_mass - self.probabilities[t - 1]) > PROB_TOL):
                raise ValueError(
                    f"stage {t}: node probabilities differ from the sum over their children"
                )

    @property
    def n_stages(self):
        return len(self.values)

    @property
    def node_counts(self):
        """Nodes per stage, root included."""
        return tuple(v.size for v in self.values)

    def conditional_probabilities(self, stage):
        """Transition probabilities into the nodes of ``stage`` (0-based, > 0)."""
        parent_p = self.probabilities[stage - 1][self.parents[stage]]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(parent_p > 0, self.probabilities[stage] / parent_p, 0.0)

    def ancestors(self, leaf):
        """Node indices, one per stage, of the root path ending at terminal ``leaf``."""
        idx = [int(leaf)]
        for t in range(self.n_stages - 1, 0, -1):
            idx.append(int(self.parents[t][idx[-1]]))
        return idx[::-1]

    def trajectories(self):
        """Return ``(values, probabilities)`` of the root-to-leaf scenarios.

        ``values`` has shape (n_leaves, T).
        """
        n_leaves = self.values[-1].size
        out = np.empty((n_leaves, self.n_stages))
        node = np.arange(n_leaves)
        for t in range(self.n_stages - 1, -1, -1):
            out[:, t] = self.values[t][node]
            node = self.parents[t][node]
        return out, np.array(self.probabilities[-1])

    def nodes(self):
        """Yield ``(stage, index, value, probability, parent)`` with 1-based stages."""
        for t in range(self.n_stages):
            for j in range(self.values[t].size):
                parent = int(self.parents[t][j])
                yield (t + 1, j, float(self.values[t][j]),
                       float(self.probabilities[t][j]), None if parent < 0 else parent)

    def to_dict(self):
        return {
            "node_counts": list(self.node_counts),
            "nodes": [
                {"stage": t, "index": j, "value": v, "probability": p, "parent": a}
                for t, j, v, p, a in self.nodes()
            ],
        }

    @classmethod
    def from_dict(cls, data):
        counts = data["node_counts"]
        values = [np.zeros(n) for n in counts]
        probs = [np.zeros(n) for n in counts]
        parents = [np.full(n, -1, dtype=np.int64) for n in counts]
        for node in data["nodes"]:
            t, j = node["stage"] - 1, node["index"]
            values[t][j] = node["value"]
            probs[t][j] = node["probability"]
            parents[t][j] = -1 if node["parent"] is None else node["parent"]
        return cls(tuple(values), tuple(probs), tuple(parents))
