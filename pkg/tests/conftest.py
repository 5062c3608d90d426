import numpy as np
import pytest

from mbmml.core import BayesianNetwork, Dag, DiscreteDataset, Variable

ACCEPTANCE_LINES: list[str] = []


def make_dataset(rows, arities=None, names=None):
    rows = np.asarray(rows, dtype=np.int64)
    if rows.ndim == 1:
        rows = rows.reshape(-1, 1)
    n = rows.shape[1]
    names = names or [f"X{i + 1}" for i in range(n)]
    arities = arities or [max(2, int(rows[:, j].max()) + 1) if rows.size else 2 for j in range(n)]
    return DiscreteDataset(tuple(Variable(nm, r) for nm, r in zip(names, arities)), rows)


def binary_network(edges, cpts, n):
    """cpts[i] is a list of rows; parents are indexed in ascending order."""
    variables = tuple(Variable(f"X{i + 1}", 2) for i in range(n))
    dag = Dag(variables, frozenset(edges))
    orders = tuple(tuple(dag.parents(i)) for i in range(n))
    return BayesianNetwork(dag, orders, tuple(np.asarray(c, dtype=float) for c in cpts))


@pytest.fixture
def chain_bn():
    """X1 -> X2 -> X3 with 0.9/0.1 copy noise."""
    strong = [[0.9, 0.1], [0.1, 0.9]]
    return binary_network({(0, 1), (1, 2)}, [[[0.5, 0.5]], strong, strong], 3)


@pytest.fixture
def collider_bn():
    """X1 -> X3 <- X2 with X3 a noisy AND of its parents."""
    return binary_network(
        {(0, 2), (1, 2)},
        [[[0.5, 0.5]], [[0.5, 0.5]], [[0.95, 0.05], [0.95, 0.05], [0.95, 0.05], [0.05, 0.95]]],
        3,
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
