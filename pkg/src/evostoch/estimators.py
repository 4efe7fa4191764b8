"""scikit-learn compatible front ends for the three solvers.

Each estimator takes its scenario data as ``X`` (one scenario or path per
row) with optional ``sample_weight`` as scenario probabilities, and exposes
``get_params``/``set_params`` through :class:`sklearn.base.BaseEstimator`.
"""
import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils import check_random_state
from sklearn.utils.validation import check_array, check_is_fitted

from .centers import pointwise_distance
from .cluster import ClusteringSpec, generate_scenarios
from .distributions import ScenarioPathMatrix, ScenarioSet, loss_distribution
from .ea import EAConfig
from .io import export_tree_dot
from .portfolio import ConstraintSet, optimize_portfolio
from .risk import ObjectiveSpec, weighted_objective
from .tree import TreeShape, TreeSpec, generate_tree


class _EvolutionaryParamsMixin:
    def _ea_config(self):
        seed = self.random_state
        if seed is None or isinstance(seed, np.random.RandomState):
            seed = int(check_random_state(seed).randint(np.iinfo(np.int64).max, dtype=np.int64))
        return EAConfig(
            population_size=self.population_size,
            offspring_count=self.offspring_count,
            max_generations=self.max_generations,
            stagnation_limit=self.stagnation_limit,
            mutation_rate=self.mutation_rate,
            crossover_rate=self.crossover_rate,
            master_seed=int(seed),
        )


class PortfolioOptimizer(_EvolutionaryParamsMixin, BaseEstimator):
    """Evolutionary maximizer of ``E(P&L) - kappa * risk(P&L)``.

    Parameters
    ----------
    kappa : float
        Risk aversion.
    risk_measure : {"stddev", "variance", "mad", "cvar"}
    alpha : float
        Tail probability for CVaR.
    buckets : int
        Budget granularity; weights are multiples of ``1 / buckets``.
    cardinality : int or None
        Exact number of selected assets, or free when None.
    constraints : sequence of callables
        Each maps a weight vector to a violation >= 0, penalized linearly
        with ``penalty_weight``.

    Attributes
    ----------
    weights_ : ndarray of shape (n_assets,)
    objective_, expectation_, risk_ : float
        Unpenalized objective and its parts at ``weights_``.
    fitness_ : float
        Penalized objective.
    log_ : list of GenerationRecord
    """

    def __init__(self, kappa=1.0, risk_measure="stddev", alpha=0.05, buckets=10,
                 cardinality=None, constraints=(), penalty_weight=1.0,
                 population_size=50, offspring_count=50, max_generations=300,
                 stagnation_limit=100, mutation_rate=0.1, crossover_rate=0.9,
                 random_state=None, n_jobs=None):
        self.kappa = kappa
        self.risk_measure = risk_measure
        self.alpha = alpha
        self.buckets = buckets
        self.cardinality = cardinality
        self.constraints = constraints
        self.penalty_weight = penalty_weight
        self.population_size = population_size
        self.offspring_count = offspring_count
        self.max_generations = max_generations
        self.stagnation_limit = stagnation_limit
        self.mutation_rate = mutation_rate
        self.crossover_rate = crossover_rate
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _spec(self):
        return ObjectiveSpec(self.risk_measure, self.kappa, self.alpha)

    def fit(self, X, y=None, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        scenarios = ScenarioSet(X, sample_weight)
        result = optimize_portfolio(
            scenarios, self._spec(),
            ConstraintSet(tuple(self.constraints or ()), self.penalty_weight),
            self._ea_config(), self.buckets, self.cardinality, n_jobs=self.n_jobs,
        )
        self.n_features_in_ = X.shape[1]
        self.weights_ = result.portfolio.weights
        self.objective_ = result.objective
        self.expectation_ = result.expectation
        self.risk_ = result.risk
        self.fitness_ = result.fitness
        self.log_ = result.log
        return self

    def predict(self, X):
        """Portfolio P&L in each scenario row of ``X``."""
        check_is_fitted(self, "weights_")
        X = check_array(X, dtype=np.float64)
        return X @ self.weights_

    def score(self, X, y=None, sample_weight=None):
        """Unpenalized objective of the fitted portfolio on ``X``."""
        check_is_fitted(self, "weights_")
        X = check_array(X, dtype=np.float64)
        dist = loss_distribution(self.weights_, ScenarioSet(X, sample_weight))
        return weighted_objective(self._spec(), dist)


class ScenarioClusterer(_EvolutionaryParamsMixin, ClusterMixin, TransformerMixin, BaseEstimator):
    """Reduce a discrete distribution to ``n_clusters`` scenarios.

    Attributes
    ----------
    cluster_centers_ : ndarray of shape (n_clusters, n_features)
    cluster_probabilities_ : ndarray of shape (n_clusters,)
    labels_ : ndarray of shape (n_samples,)
        0-based cluster index of each input scenario (the 1-based cluster id
        minus one).
    objective_ : float
    distances_ : ndarray of shape (n_clusters,)
    log_ : list of GenerationRecord
    """

    def __init__(self, n_clusters=2, distance="l1", center="mean",
                 probability_weighted=False, dim_weights=None,
                 population_size=50, offspring_count=50, max_generations=300,
                 stagnation_limit=100, mutation_rate=0.1, crossover_rate=0.9,
                 random_state=None, n_jobs=None):
        self.n_clusters = n_clusters
        self.distance = distance
        self.center = center
        self.probability_weighted = probability_weighted
        self.dim_weights = dim_weights
        self.population_size = population_size
        self.offspring_count = offspring_count
        self.max_generations = max_generations
        self.stagnation_limit = stagnation_limit
        self.mutation_rate = mutation_rate
        self.crossover_rate = crossover_rate
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        spec = ClusteringSpec(self.n_clusters, self.distance, self.center,
                              self.probability_weighted, self.dim_weights)
        result = generate_scenarios(ScenarioSet(X, sample_weight), spec,
                                    self._ea_config(), n_jobs=self.n_jobs)
        self.n_features_in_ = X.shape[1]
        self.cluster_centers_ = np.array(result.scenarios.values)
        self.cluster_probabilities_ = np.array(result.scenarios.probabilities)
        self.labels_ = result.output.ids - 1
        self.objective_ = result.objective
        self.distances_ = result.output.distances
        self.log_ = result.log
        return self

    def transform(self, X):
        """Distance of every row of ``X`` to every cluster center."""
        check_is_fitted(self, "cluster_centers_")
        X = check_array(X, dtype=np.float64)
        w = np.ones(X.shape[1]) if self.dim_weights is None else np.asarray(self.dim_weights)
        diff = X[:, None, :] - self.cluster_centers_[None, :, :]
        return pointwise_distance(diff, self.distance) @ w

    def predict(self, X):
        """Index of the nearest center.

        On the training data this can differ from ``labels_``: the evolved
        assignment is not constrained to nearest-center form.
        """
        return np.argmin(self.transform(X), axis=1)


class ScenarioTreeGenerator(_EvolutionaryParamsMixin, BaseEstimator):
    """Build a scenario tree of a given shape from sampled paths.

    ``X`` holds one path per row, columns being stages 2..T; stage 1 is the
    root with value ``root_value``.

    Attributes
    ----------
    tree_ : ScenarioTree
    objective_ : float
        Path-to-tree distance of ``tree_``.
    labels_ : ndarray of shape (n_samples,)
        Terminal node each input path was routed to.
    log_ : list of GenerationRecord
    """

    def __init__(self, shape=(10, 40), center="median", distance="l1",
                 probability_weighted=True, root_value=0.0,
                 population_size=50, offspring_count=50, max_generations=300,
                 stagnation_limit=100, mutation_rate=0.1, crossover_rate=0.9,
                 random_state=None, n_jobs=None):
        self.shape = shape
        self.center = center
        self.distance = distance
        self.probability_weighted = probability_weighted
        self.root_value = root_value
        self.population_size = population_size
        self.offspring_count = offspring_count
        self.max_generations = max_generations
        self.stagnation_limit = stagnation_limit
        self.mutation_rate = mutation_rate
        self.crossover_rate = crossover_rate
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None, sample_weight=None):
        X = check_array(X, dtype=np.float64)
        shape = self.shape if isinstance(self.shape, TreeShape) else TreeShape(tuple(self.shape))
        paths = ScenarioPathMatrix(X, sample_weight, self.root_value)
        result = generate_tree(paths, shape,
                               TreeSpec(self.distance, self.center, self.probability_weighted),
                               self._ea_config(), n_jobs=self.n_jobs)
        self.n_features_in_ = X.shape[1]
        self.tree_ = result.tree
        self.objective_ = result.objective
        self.labels_ = np.array(result.tree.routing)
        self.log_ = result.log
        return self

    def to_dot(self):
        check_is_fitted(self, "tree_")
        return export_tree_dot(self.tree_)
