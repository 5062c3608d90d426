"""Random Bayesian networks and forward sampling for benchmarks."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import BayesianNetwork, Dag, DiscreteDataset, Variable, topological_order
from .streams import derive_rng


@dataclass(frozen=True)
class NetworkSpec:
    n_vars: int
    max_fanin: int
    max_arity: int
    gen_alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_vars < 1:
            raise ValueError("n_vars must be >= 1")
        if self.max_fanin < 0:
            raise ValueError("max_fanin must be >= 0")
        if self.max_arity < 2:
            raise ValueError("max_arity must be >= 2")
        if not self.gen_alpha > 0:
            raise ValueError("gen_alpha must be positive")

    @property
    def label(self) -> str:
        alpha = int(self.gen_alpha) if float(self.gen_alpha).is_integer() else self.gen_alpha
        return f"{self.n_vars}-{self.max_fanin}-{self.max_arity}-{alpha}"


def random_dag(spec: NetworkSpec, rng: np.random.Generator) -> Dag:
    """Uniform total order; each node takes a uniform number of parents (up to
    the fan-in cap) drawn uniformly from its predecessors."""
    n = spec.n_vars
    arities = rng.integers(2, spec.max_arity + 1, size=n)
    order = rng.permutation(n)
    edges = set()
    for pos, v in enumerate(order):
        k = int(rng.integers(0, min(pos, spec.max_fanin) + 1))
        if k:
            for p in rng.choice(pos, size=k, replace=False):
                edges.add((int(order[p]), int(v)))
    variables = tuple(Variable(f"X{i + 1}", int(arities[i])) for i in range(n))
    return Dag(variables, frozenset(edges))


def random_parameters(dag: Dag, gen_alpha: float, rng: np.random.Generator) -> BayesianNetwork:
    """One symmetric Dirichlet(gen_alpha) draw per CPT row."""
    orders, tables = [], []
    for i, var in enumerate(dag.variables):
        parents = tuple(dag.parents(i))
        rows = int(np.prod([dag.variables[p].arity for p in parents], dtype=np.int64))
        t = rng.dirichlet(np.full(var.arity, gen_alpha), size=rows)
        # tiny alphas can underflow a whole row to zero
        bad = ~np.isfinite(t).all(axis=1) | (t.sum(axis=1) <= 0)
        for r in np.flatnonzero(bad):
            t[r] = 0.0
            t[r, rng.integers(var.arity)] = 1.0
        t /= t.sum(axis=1, keepdims=True)
        orders.append(parents)
        tables.append(t)
    return BayesianNetwork(dag, tuple(orders), tuple(tables))


def generate_network(spec: NetworkSpec) -> BayesianNetwork:
    return random_parameters(random_dag(spec, derive_rng(spec.seed, "dag")), spec.gen_alpha, derive_rng(spec.seed, "cpt"))


def ancestral_sample(bn: BayesianNetwork, n_records: int, rng: np.random.Generator) -> DiscreteDataset:
    if n_records < 1:
        raise ValueError("n_records must be >= 1")
    n = bn.dag.n_vars
    data = np.zeros((n_records, n), dtype=np.int64)
    for v in topological_order(bn.dag):
        row = np.zeros(n_records, dtype=np.int64)
        for p in bn.parent_orders[v]:
            row = row * bn.variables[p].arity + data[:, p]
        cum = np.cumsum(bn.cpts[v], axis=1)[row]
        u = rng.random(n_records)
        state = (u[:, None] >= cum).sum(axis=1)
        data[:, v] = np.minimum(state, bn.variables[v].arity - 1)
    return DiscreteDataset(bn.variables, data)


def exact_joint(bn: BayesianNetwork) -> dict[tuple[int, ...], float]:
    """Brute-force joint distribution; only for tiny networks."""
    out = {}
    for states in itertools.product(*[range(v.arity) for v in bn.variables]):
        p = 1.0
        for v in range(bn.dag.n_vars):
            row = 0
            for q in bn.parent_orders[v]:
                row = row * bn.variables[q].arity + states[q]
            p *= bn.cpts[v][row, states[v]]
        out[states] = p
    return out
