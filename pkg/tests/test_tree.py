import itertools
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evostoch import (
    EAConfig, ScenarioPathMatrix, ScenarioTree, TreeShape, TreeSpec, generate_tree,
    map_to_tree, tree_distance,
)
from evostoch.exceptions import ConfigurationError, NoValidSolutionError

from conftest import assert_monotone_log

# Fixed chromosome for the six-path fixture, shape [2, 3]:
#   path genes   -> terminals (0, 0, 1, 2, 2, 0)
#   parent genes -> terminals 0 | 1, 2 hang off stage-2 nodes 0 | 1
SIX_GENES = [0.1, 0.2, 0.5, 0.9, 0.7, 0.3, 0.2, 0.8, 0.6]


def test_shape_basics():
    shape = TreeShape.parse("10, 40")
    assert shape.node_counts == (10, 40)
    assert shape.n_stages == 3 and shape.n_terminal == 40
    assert shape.chromosome_length(200) == 240
    assert TreeShape((2, 3, 4)).chromosome_length(10) == 17
    with pytest.raises(ConfigurationError):
        TreeShape((3,))
    with pytest.raises(ConfigurationError):
        TreeShape((0, 2))
    with pytest.raises(ConfigurationError):
        TreeShape.parse("a,b")


def test_identity_embedding():
    paths = ScenarioPathMatrix([[1.0, 1.5], [1.0, 0.5], [3.0, 3.2], [3.0, 2.8]])
    genes = [0.1, 0.3, 0.6, 0.9, 0.1, 0.2, 0.7, 0.8]
    tree = map_to_tree(genes, paths, TreeShape((2, 4)))
    np.testing.assert_array_equal(tree.values[2], [1.5, 0.5, 3.2, 2.8])
    np.testing.assert_array_equal(tree.values[1], [1.0, 3.0])
    np.testing.assert_array_equal(tree.parents[2], [0, 0, 1, 1])
    assert tree_distance(tree, paths) == 0.0


def test_collapsed_assignment_invalid():
    paths = ScenarioPathMatrix(np.arange(8.0).reshape(4, 2))
    genes = [0.0, 0.1, 0.2, 0.1, 0.1, 0.2, 0.7, 0.8]
    assert map_to_tree(genes, paths, TreeShape((2, 4))) is None


def test_childless_intermediate_node_invalid():
    paths = ScenarioPathMatrix(np.arange(8.0).reshape(4, 2))
    # All terminals attached to stage-2 node 0, node 1 left empty.
    genes = [0.1, 0.3, 0.6, 0.9, 0.1, 0.2, 0.3, 0.4]
    assert map_to_tree(genes, paths, TreeShape((2, 4))) is None


def test_six_path_fixture(six_paths):
    tree = map_to_tree(SIX_GENES, six_paths, TreeShape((2, 3)))
    # Stage 2: {1.0, 1.2, 0.9} -> 1.0 and {3.0, 2.8, 3.1} -> 3.0
    np.testing.assert_allclose(tree.values[1], [1.0, 3.0])
    # Stage 3: {1.5, 0.8, 1.1} -> 1.1, {3.5}, {2.0, 4.4} -> 3.2
    np.testing.assert_allclose(tree.values[2], [1.1, 3.5, 3.2])
    np.testing.assert_allclose(tree.probabilities[1], [0.5, 0.5])
    np.testing.assert_allclose(tree.probabilities[2], [0.5, 1 / 6, 1 / 3])
    np.testing.assert_array_equal(tree.parents[2], [0, 1, 1])
    np.testing.assert_array_equal(tree.routing, [0, 0, 1, 2, 2, 0])
    # Per path l1: 0.4, 0.5, 0.0, 1.4, 1.3, 0.1 -> 3.7, each with p = 1/6
    assert tree_distance(tree, six_paths) == pytest.approx(3.7 / 6, abs=1e-12)
    assert tree_distance(tree, six_paths, probability_weighted=False) == pytest.approx(3.7, abs=1e-12)


def test_mean_center(six_paths):
    tree = map_to_tree(SIX_GENES, six_paths, TreeShape((2, 3)), center="mean")
    np.testing.assert_allclose(tree.values[1], [3.1 / 3, 8.9 / 3])
    np.testing.assert_allclose(tree.values[2], [3.4 / 3, 3.5, 3.2])


def test_root_value_carried(six_paths):
    paths = ScenarioPathMatrix(six_paths.paths, root_value=0.25)
    assert map_to_tree(SIX_GENES, paths, TreeShape((2, 3))).values[0][0] == 0.25


def test_length_mismatch(six_paths):
    with pytest.raises(ValueError, match="genes"):
        map_to_tree(SIX_GENES[:-1], six_paths, TreeShape((2, 3)))


def test_shape_larger_than_paths(six_paths):
    with pytest.raises(ConfigurationError, match="exceed"):
        map_to_tree(np.zeros(13), six_paths, TreeShape((2, 7)))
    with pytest.raises(ConfigurationError, match="stages"):
        map_to_tree(np.zeros(13), six_paths, TreeShape((2, 3, 4)))


def test_four_stage_blocks():
    paths = ScenarioPathMatrix(np.arange(12.0).reshape(4, 3))
    shape = TreeShape((2, 3, 4))
    genes = [0.1, 0.3, 0.6, 0.9,     # paths -> stage-4 nodes 0..3
             0.1, 0.5, 0.5, 0.9,     # stage-4 nodes -> stage-3 parents (0, 1, 1, 2)
             0.2, 0.7, 0.9]          # stage-3 nodes -> stage-2 parents (0, 1, 1)
    tree = map_to_tree(genes, paths, shape)
    np.testing.assert_array_equal(tree.parents[3], [0, 1, 1, 2])
    np.testing.assert_array_equal(tree.parents[2], [0, 1, 1])
    assert tree.node_counts == (1, 2, 3, 4)
    # Stage-2 node 1 carries paths 1, 2, 3 -> stage-2 values 3, 6, 9.
    np.testing.assert_allclose(tree.values[1], [0.0, 6.0])
    np.testing.assert_allclose(tree.probabilities[1], [0.25, 0.75])


def test_single_path_distance():
    paths = ScenarioPathMatrix([[2.0, 2.0]])
    exact = ScenarioTree(([0.0], [2.0], [2.0]), ([1.0], [1.0], [1.0]), ([-1], [0], [0]), routing=[0])
    off = ScenarioTree(([0.0], [3.0], [2.0]), ([1.0], [1.0], [1.0]), ([-1], [0], [0]), routing=[0])
    assert tree_distance(exact, paths) == 0.0
    assert tree_distance(off, paths, "l1") == 1.0
    assert tree_distance(off, paths, "l2") == 1.0


def test_distance_needs_routing():
    paths = ScenarioPathMatrix([[2.0, 2.0]])
    tree = ScenarioTree(([0.0], [2.0], [2.0]), ([1.0], [1.0], [1.0]), ([-1], [0], [0]))
    with pytest.raises(ValueError, match="terminal node"):
        tree_distance(tree, paths)


def enumerate_tree_optimum(paths, n2, n3):
    """Exhaustive minimum of the weighted l1 path distance over all valid median trees."""
    rows = paths.paths.tolist()
    p = paths.probabilities.tolist()
    s = len(rows)
    best = float("inf")
    for parents in itertools.product(range(n2), repeat=n3):
        if len(set(parents)) < n2:
            continue
        for term in itertools.product(range(n3), repeat=s):
            if len(set(term)) < n3:
                continue
            mid = [parents[j] for j in term]
            v2 = {a: statistics.median(rows[i][0] for i in range(s) if mid[i] == a) for a in range(n2)}
            v3 = {b: statistics.median(rows[i][1] for i in range(s) if term[i] == b) for b in range(n3)}
            total = sum(p[i] * (abs(rows[i][0] - v2[mid[i]]) + abs(rows[i][1] - v3[term[i]]))
                        for i in range(s))
            best = min(best, total)
    return best


def test_ea_matches_enumeration(six_paths):
    oracle = enumerate_tree_optimum(six_paths, 2, 3)
    result = generate_tree(six_paths, TreeShape((2, 3)), TreeSpec(), EAConfig(master_seed=0))
    assert result.objective == pytest.approx(oracle, abs=1e-9)
    assert tree_distance(result.tree, six_paths) == pytest.approx(result.objective, abs=1e-12)
    assert_monotone_log(result.log)


def test_identical_paths_degenerate():
    paths = ScenarioPathMatrix(np.tile([0.4, -0.3], (5, 1)))
    result = generate_tree(paths, TreeShape((1, 1)), ea=EAConfig(max_generations=5))
    assert result.objective == 0.0
    traj, _ = result.tree.trajectories()
    np.testing.assert_array_equal(traj, [[0.0, 0.4, -0.3]])


def test_no_valid_tree_error():
    paths = ScenarioPathMatrix(np.random.default_rng(0).normal(size=(8, 2)))
    cfg = EAConfig(population_size=2, offspring_count=1, max_generations=1)
    with pytest.raises(NoValidSolutionError, match="fewer nodes"):
        generate_tree(paths, TreeShape((8, 8)), ea=cfg)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 4), (3, 6), (1, 5), (2, 3, 5)]),
       st.sampled_from(["median", "mean"]))
def test_valid_tree_invariants(seed, counts, center):
    rng = np.random.default_rng(seed)
    shape = TreeShape(counts)
    paths = ScenarioPathMatrix(rng.normal(size=(12, len(counts))), rng.dirichlet(np.ones(12)))
    tree = map_to_tree(rng.random(shape.chromosome_length(12)), paths, shape, center)
    if tree is None:
        return
    assert tree.node_counts == (1, *counts)
    for t in range(tree.n_stages):
        assert tree.probabilities[t].sum() == pytest.approx(1.0, abs=1e-9)
    for t in range(1, tree.n_stages):
        mass = np.bincount(tree.parents[t], weights=tree.probabilities[t],
                           minlength=tree.node_counts[t - 1])
        np.testing.assert_allclose(mass, tree.probabilities[t - 1], atol=1e-9)
    # Every path's stage-t node is the ancestor of its terminal node.
    for i, leaf in enumerate(tree.routing):
        assert len(tree.ancestors(leaf)) == tree.n_stages
    d = tree_distance(tree, paths)
    assert d >= 0
    traj, _ = tree.trajectories()
    exact = np.allclose(traj[tree.routing][:, 1:], paths.paths)
    assert (d == 0) == exact
