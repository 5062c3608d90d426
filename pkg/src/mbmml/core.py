"""Domain types shared across the package: variables, DAGs, networks,
datasets, Markov blankets and contingency counts.

All containers are immutable after construction. Numpy arrays held by them
are flagged read-only.
"""
from __future__ import annotations

import hashlib
import heapq
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class StructureError(ValueError):
    """Invalid graph structure (cycle, self-loop, bad index)."""


class DataError(ValueError):
    """Dataset or table contents violate their declared shape or arities."""


@dataclass(frozen=True)
class Variable:
    name: str
    arity: int

    def __post_init__(self):
        if not isinstance(self.arity, (int, np.integer)) or self.arity < 2:
            raise DataError(f"variable {self.name!r}: arity must be an integer >= 2, got {self.arity!r}")


def _check_unique_names(variables: Sequence[Variable]) -> None:
    seen = set()
    for v in variables:
        if v.name in seen:
            raise DataError(f"duplicate variable name {v.name!r}")
        seen.add(v.name)


@dataclass(frozen=True)
class Dag:
    variables: tuple[Variable, ...]
    edges: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "edges", frozenset((int(a), int(b)) for a, b in self.edges))
        _check_unique_names(self.variables)
        n = len(self.variables)
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n):
                raise StructureError(f"edge ({a}, {b}) references a missing variable")
            if a == b:
                raise StructureError(f"self-loop on variable {a}")
        topological_order(self)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def arities(self) -> list[int]:
        return [v.arity for v in self.variables]

    def index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise KeyError(name)

    def parents(self, i: int) -> list[int]:
        return sorted(a for a, b in self.edges if b == i)

    def children(self, i: int) -> list[int]:
        return sorted(b for a, b in self.edges if a == i)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def topological_order(dag: Dag) -> list[int]:
    """Kahn's algorithm, always releasing the lowest available index first."""
    n = len(dag.variables)
    indeg = [0] * n
    out: list[list[int]] = [[] for _ in range(n)]
    for a, b in dag.edges:
        indeg[b] += 1
        out[a].append(b)
    heap = [i for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        i = heapq.heappop(heap)
        order.append(i)
        for j in out[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, j)
    if len(order) < n:
        stuck = {i for i in range(n) if indeg[i] > 0}
        edge = min((a, b) for a, b in dag.edges if a in stuck and b in stuck)
        raise StructureError(f"cycle detected through edge {edge}")
    return order


def markov_blanket_of(dag: Dag, target: int) -> "MarkovBlanket":
    """Parents, children and the children's other parents of ``target``."""
    if not 0 <= target < dag.n_vars:
        raise IndexError(f"target {target} out of range for {dag.n_vars} variables")
    members = set(dag.parents(target))
    for c in dag.children(target):
        members.add(c)
        members.update(dag.parents(c))
    members.discard(target)
    return MarkovBlanket(target, frozenset(members))


@dataclass(frozen=True)
class MarkovBlanket:
    target: int
    members: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(m) for m in self.members))
        if self.target in self.members:
            raise StructureError(f"target {self.target} listed in its own blanket")

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True, eq=False)
class BayesianNetwork:
    """A DAG with one CPT per variable.

    ``parent_orders[i]`` lists the parents of variable ``i`` in the order used
    to index rows of ``cpts[i]`` (row-major, first parent most significant).
    """

    dag: Dag
    parent_orders: tuple[tuple[int, ...], ...]
    cpts: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "parent_orders", tuple(tuple(int(p) for p in po) for po in self.parent_orders))
        tables = []
        for i, (var, order, table) in enumerate(zip(self.dag.variables, self.parent_orders, self.cpts)):
            if sorted(order) != self.dag.parents(i):
                raise StructureError(f"{var.name}: parent order {order} does not match DAG parents {self.dag.parents(i)}")
            t = np.array(table, dtype=float)
            rows = int(np.prod([self.dag.variables[p].arity for p in order], dtype=np.int64))
            if t.shape != (rows, var.arity):
                raise DataError(f"{var.name}: CPT shape {t.shape}, expected {(rows, var.arity)}")
            if (t < 0).any() or np.abs(t.sum(axis=1) - 1.0).max() > 1e-9:
                raise DataError(f"{var.name}: CPT rows must be non-negative and sum to 1")
            t.flags.writeable = False
            tables.append(t)
        if len(tables) != self.dag.n_vars or len(self.parent_orders) != self.dag.n_vars:
            raise DataError("one CPT per variable required")
        object.__setattr__(self, "cpts", tuple(tables))

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.dag.variables

    def same_structure(self, other: "BayesianNetwork") -> bool:
        return (
            self.dag == other.dag
            and self.parent_orders == other.parent_orders
            and all(np.array_equal(a, b) for a, b in zip(self.cpts, other.cpts))
        )


@dataclass(frozen=True, eq=False)
class DiscreteDataset:
    variables: tuple[Variable, ...]
    records: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        _check_unique_names(self.variables)
        data = np.array(self.records, dtype=np.int64, copy=True)
        if data.ndim == 1 and len(self.variables) == 1:
            data = data.reshape(-1, 1)
        if data.size == 0:
            data = data.reshape(0, len(self.variables))
        if data.ndim != 2 or data.shape[1] != len(self.variables):
            raise DataError(f"records shape {data.shape} does not match {len(self.variables)} variables")
        for j, v in enumerate(self.variables):
            col = data[:, j]
            if col.size and (col.min() < 0 or col.max() >= v.arity):
                bad = int(np.flatnonzero((col < 0) | (col >= v.arity))[0])
                raise DataError(f"record {bad}, column {v.name!r}: value {col[bad]} outside [0, {v.arity})")
        data.flags.writeable = False
        object.__setattr__(self, "records", data)

    @property
    def n_records(self) -> int:
        return self.records.shape[0]

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    @property
    def arities(self) -> list[int]:
        return [v.arity for v in self.variables]

    def index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise KeyError(name)

    def column(self, i: int) -> np.ndarray:
        return self.records[:, i]

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(",".join(f"{v.name}:{v.arity}" for v in self.variables).encode())
        h.update(np.ascontiguousarray(self.records, dtype="<i8").tobytes())
        return h.hexdigest()


def cell_index(dataset: DiscreteDataset, conditioning: Iterable[int]) -> tuple[np.ndarray, int]:
    """Row-major cell index of every record over ``conditioning`` (sorted
    ascending, lowest index most significant), plus the number of cells."""
    cols = sorted(conditioning)
    idx = np.zeros(dataset.n_records, dtype=np.int64)
    n_cells = 1
    for c in cols:
        r = dataset.variables[c].arity
        idx = idx * r + dataset.records[:, c]
        n_cells *= r
    return idx, n_cells


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    target_arity: int
    conditioning_arities: tuple[int, ...]
    counts: np.ndarray

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def n_cells(self) -> int:
        return self.counts.shape[0]


def build_contingency(dataset: DiscreteDataset, target: int, conditioning: Iterable[int] = ()) -> ContingencyTable:
    cond = sorted(set(conditioning))
    n = dataset.n_vars
    if not 0 <= target < n or any(not 0 <= c < n for c in cond):
        raise IndexError("variable index out of range")
    if target in cond:
        raise DataError(f"target {target} also appears in the conditioning set")
    if dataset.n_records == 0:
        raise DataError("cannot count an empty dataset")
    idx, n_cells = cell_index(dataset, cond)
    r = dataset.variables[target].arity
    flat = np.bincount(idx * r + dataset.records[:, target], minlength=n_cells * r)
    counts = flat.reshape(n_cells, r)
    counts.flags.writeable = False
    return ContingencyTable(r, tuple(dataset.variables[c].arity for c in cond), counts)
