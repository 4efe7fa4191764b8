"""Evolutionary optimization for finite stochastic programs.

Portfolio selection under a risk-return objective, single-stage scenario
reduction by evolutionary clustering, and multi-stage scenario tree
generation, all driven by one (mu + lambda) evolutionary engine.
"""
from .cluster import ClusteringSpec, assign_clusters, build_output, flip_mutate, generate_scenarios
from .distributions import (
    LossDistribution,
    ScenarioPathMatrix,
    ScenarioSet,
    ScenarioTree,
    loss_distribution,
)
from .ea import EAConfig, EAResult, GenerationRecord, Individual, UnitIntervalProblem, run, select
from .estimators import PortfolioOptimizer, ScenarioClusterer, ScenarioTreeGenerator
from .exceptions import ConfigurationError, DataFormatError, NoValidSolutionError
from .io import export_tree_dot
from .portfolio import (
    ConstraintSet,
    Portfolio,
    PortfolioGenotype,
    decode,
    max_cardinality,
    max_weight,
    optimize_portfolio,
)
from .risk import ObjectiveSpec, cvar, expectation, mad, risk, stddev, variance, weighted_objective
from .tree import TreeShape, TreeSpec, generate_tree, map_to_tree, tree_distance

__version__ = "0.1.0"
