from pathlib import Path

import numpy as np
import pytest

from mbmml.core import Dag, Variable, topological_order
from mbmml.formats import dumps_json, network_to_dict
from mbmml.synth import (
    NetworkSpec,
    ancestral_sample,
    exact_joint,
    generate_network,
    random_dag,
    random_parameters,
)
from mbmml.streams import derive_rng
from conftest import binary_network

GOLDEN = Path(__file__).parent / "data" / "net_30_5_4_seed7.json"


def test_single_variable_and_zero_fanin():
    assert generate_network(NetworkSpec(1, 4, 3, seed=1)).dag.edges == frozenset()
    bn = generate_network(NetworkSpec(12, 0, 3, seed=2))
    assert bn.dag.edges == frozenset()


def test_golden_network_is_reproducible():
    bn = generate_network(NetworkSpec(30, 5, 4, 1.0, seed=7))
    assert dumps_json(network_to_dict(bn)) == GOLDEN.read_text(encoding="utf-8")
    assert max(len(bn.dag.parents(i)) for i in range(30)) <= 5
    assert all(2 <= v.arity <= 4 for v in bn.variables)


@pytest.mark.parametrize("seed", range(10))
def test_fanin_cap_and_acyclicity(seed):
    spec = NetworkSpec(25, 3, 3, seed=seed)
    dag = random_dag(spec, derive_rng(seed, "dag"))
    assert max(len(dag.parents(i)) for i in range(25)) <= 3
    assert sorted(topological_order(dag)) == list(range(25))


def test_spec_validation():
    for bad in [(0, 1, 2), (3, -1, 2), (3, 1, 1)]:
        with pytest.raises(ValueError):
            NetworkSpec(*bad)
    with pytest.raises(ValueError):
        NetworkSpec(3, 1, 2, gen_alpha=0)
    assert NetworkSpec(30, 5, 4, 1.0).label == "30-5-4-1"


def _root_rows(gen_alpha, arity, draws, seed):
    dag = Dag((Variable("A", arity),), frozenset())
    rng = derive_rng(seed, "dirichlet")
    return np.array([random_parameters(dag, gen_alpha, rng).cpts[0][0] for _ in range(draws)])


def test_dirichlet_alpha_one_is_symmetric():
    rows = _root_rows(1.0, 2, 10_000, 1)
    assert abs(rows[:, 0].mean() - 0.5) < 0.01


def test_dirichlet_large_alpha_concentrates():
    rows = _root_rows(100.0, 4, 10_000, 2)
    assert np.mean(np.abs(rows - 0.25).max(axis=1) < 0.2) >= 0.99


def test_dirichlet_small_alpha_goes_to_vertices():
    rows = _root_rows(0.1, 2, 10_000, 3)
    assert np.mean(rows.max(axis=1) > 0.9) > 0.5


def test_cpt_rows_are_distributions():
    bn = generate_network(NetworkSpec(15, 3, 4, gen_alpha=0.05, seed=4))
    for t in bn.cpts:
        assert np.allclose(t.sum(axis=1), 1.0) and (t >= 0).all()


def test_deterministic_cpts_force_records():
    bn = binary_network({(0, 1)}, [[[0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]], 2)
    d = ancestral_sample(bn, 200, derive_rng(0, "s"))
    assert (d.records == [1, 1]).all()


def test_root_frequency():
    bn = binary_network(set(), [[[0.5, 0.5]]], 1)
    d = ancestral_sample(bn, 10_000, derive_rng(3, "s"))
    assert abs(np.mean(d.column(0) == 0) - 0.5) < 0.02


def test_perfect_copy():
    bn = binary_network({(0, 1)}, [[[0.3, 0.7]], [[1.0, 0.0], [0.0, 1.0]]], 2)
    d = ancestral_sample(bn, 500, derive_rng(1, "s"))
    assert (d.column(0) == d.column(1)).all()


def test_sample_matches_exact_joint():
    bn = generate_network(NetworkSpec(4, 2, 3, seed=11))
    joint = exact_joint(bn)
    assert sum(joint.values()) == pytest.approx(1.0)
    d = ancestral_sample(bn, 50_000, derive_rng(11, "s"))
    emp = {}
    for row in map(tuple, d.records.tolist()):
        emp[row] = emp.get(row, 0) + 1
    tv = 0.5 * sum(abs(emp.get(k, 0) / 50_000 - p) for k, p in joint.items())
    assert tv < 0.02


def test_sampling_is_reproducible():
    bn = generate_network(NetworkSpec(8, 3, 3, seed=5))
    a = ancestral_sample(bn, 100, derive_rng(9, "sample"))
    b = ancestral_sample(bn, 100, derive_rng(9, "sample"))
    assert a.digest() == b.digest()
    with pytest.raises(ValueError):
        ancestral_sample(bn, 0, derive_rng(9))
