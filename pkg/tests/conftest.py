from pathlib import Path

import numpy as np
import pytest

from evostoch import ScenarioPathMatrix, ScenarioSet

REPO = Path(__file__).resolve().parents[1]
DATA = REPO / "data"
TEST_DATA = Path(__file__).resolve().parent / "data"

TEN_RETURNS = [0.017, -0.023, -0.008, -0.022, -0.019, 0.024, 0.016, -0.006, 0.032, -0.023]
TEN_CHROMOSOME = [0.4387, 0.3816, 0.7655, 0.7952, 0.1869, 0.4898, 0.4456, 0.6463, 0.7094, 0.7547]

# Lines collected by tests/test_acceptance.py, printed in the terminal summary.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def ten_scenarios():
    return ScenarioSet(np.array(TEN_RETURNS))


@pytest.fixture
def six_paths():
    return ScenarioPathMatrix(np.loadtxt(TEST_DATA / "six_paths.csv", delimiter=",", skiprows=1))


@pytest.fixture(scope="session")
def sample_paths():
    return ScenarioPathMatrix(np.loadtxt(DATA / "paths_200.csv", delimiter=",", skiprows=1))


def assert_monotone_log(log, maximize=False):
    best = [r.best for r in log]
    for prev, cur in zip(best, best[1:]):
        assert (cur >= prev) if maximize else (cur <= prev), f"best worsened: {prev} -> {cur}"


def dot_nodes_edges(graph):
    """Collect node names and (src, dst) edges from a pydot graph, including subgraphs."""
    nodes, edges = set(), []
    stack = [graph]
    while stack:
        g = stack.pop()
        nodes.update(n.get_name().strip('"') for n in g.get_nodes()
                     if n.get_name() not in ("node", "edge", "graph"))
        for e in g.get_edges():
            src, dst = e.get_source().strip('"'), e.get_destination().strip('"')
            edges.append((src, dst))
            nodes.update((src, dst))
        stack.extend(g.get_subgraphs())
    return nodes, edges
