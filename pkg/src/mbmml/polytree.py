"""Markov blanket polytrees: counting, enumeration and uniform sampling.

A blanket polytree over ``{target} | members`` gives every member one role:
a parent of the target, a child of the target, or a co-parent ("spouse") of
exactly one child. A child together with its spouses is a *branch*; a branch
with ``b`` nodes can be labelled in ``b`` ways (any of its nodes may be the
child). Members outside branches are free parents or children.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Iterable, Mapping

import numpy as np

from .core import StructureError

ENUMERATION_CAP = 7


@dataclass(frozen=True)
class MbPolytree:
    target: int
    members: frozenset[int] = frozenset()
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(int(m) for m in self.members))
        object.__setattr__(self, "edges", frozenset((int(a), int(b)) for a, b in self.edges))

    @classmethod
    def from_roles(
        cls,
        target: int,
        parents: Iterable[int] = (),
        children: Iterable[int] = (),
        branches: Mapping[int, Iterable[int]] | None = None,
    ) -> "MbPolytree":
        """Build from roles; ``branches`` maps each collider child to its spouses."""
        edges = {(p, target) for p in parents}
        edges |= {(target, c) for c in children}
        members = set(parents) | set(children)
        for child, spouses in (branches or {}).items():
            edges.add((target, child))
            members.add(child)
            for s in spouses:
                edges.add((s, child))
                members.add(s)
        return cls(target, frozenset(members), frozenset(edges))

    @classmethod
    def star(cls, target: int, parents: Iterable[int] = (), children: Iterable[int] = ()) -> "MbPolytree":
        return cls.from_roles(target, parents, children)

    @property
    def nodes(self) -> frozenset[int]:
        return self.members | {self.target}

    def parents_of(self, v: int) -> list[int]:
        return sorted(a for a, b in self.edges if b == v)

    def children_of(self, v: int) -> list[int]:
        return sorted(b for a, b in self.edges if a == v)

    def roles(self) -> dict[int, str | tuple[str, int]]:
        """``'parent'``, ``'child'`` or ``('spouse', child)`` per member."""
        t = self.target
        out: dict[int, str | tuple[str, int]] = {}
        for p in self.parents_of(t):
            out[p] = "parent"
        for c in self.children_of(t):
            out[c] = "child"
            for s in self.parents_of(c):
                if s != t:
                    out[s] = ("spouse", c)
        return out

    def canonical(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.edges))

    def relabel(self, mapping: Mapping[int, int]) -> "MbPolytree":
        return MbPolytree(
            mapping[self.target],
            frozenset(mapping[m] for m in self.members),
            frozenset((mapping[a], mapping[b]) for a, b in self.edges),
        )


def is_valid_mbp(structure: MbPolytree, target: int, mb_set: Iterable[int]) -> bool:
    mb = frozenset(mb_set)
    if structure.target != target or target in mb or structure.members != mb:
        return False
    nodes = structure.nodes
    undirected = set()
    for a, b in structure.edges:
        if a == b or a not in nodes or b not in nodes:
            return False
        key = (min(a, b), max(a, b))
        if key in undirected:
            return False
        undirected.add(key)
    if len(undirected) != len(nodes) - 1:
        return False
    # connected + |E| = |V| - 1 => tree
    adj: dict[int, set[int]] = {v: set() for v in nodes}
    for a, b in undirected:
        adj[a].add(b)
        adj[b].add(a)
    seen, stack = {target}, [target]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if seen != nodes:
        return False
    children = {b for a, b in structure.edges if a == target}
    for a, b in structure.edges:
        if a == target or b == target:
            continue
        if b not in children:
            return False
    blanket = {a for a, b in structure.edges if b == target} | children
    blanket |= {a for a, b in structure.edges if b in children and a != target}
    return blanket == mb


# -- counting ---------------------------------------------------------------


def count_mbp_qm(n: int) -> Fraction | int:
    """Collider/largest-branch recursion with the ``q/m`` overlap factor.

    Sums, over the number of colliders ``m`` and the spouse count ``k`` of the
    largest branch, the labelled largest branch times the recursively counted
    remainder, correcting double counting with the factor ``q/m``. Agrees
    with :func:`count_mbp` for ``n <= 7``; from ``n = 8`` the ``q/m`` factor
    under-corrects when equal-sized branches are followed by a smaller one.
    """
    if n < 0:
        raise ValueError("blanket size must be non-negative")

    @lru_cache(maxsize=None)
    def g(n: int, m: int, k: int) -> Fraction:
        head = comb(n, k + 1) * (k + 1)
        rest = n - k - 1
        if m == 1:
            return Fraction(head * 2**rest)
        total = Fraction(0)
        for k2 in range(1, min(k, n - k - 2 * (m - 1)) + 1):
            q = 1 if k2 == k else m
            total += Fraction(q, m) * g(rest, m - 1, k2)
        return head * total

    f = Fraction(2**n)
    for m in range(1, n // 2 + 1):
        for k in range(1, n - 2 * m + 2):
            f += g(n, m, k)
    return int(f) if f.denominator == 1 else f


@lru_cache(maxsize=None)
def _branch_sets(n: int, m: int, k: int, run: int) -> Fraction:
    """Labelled placements of ``m`` branches over ``n`` nodes, taken in
    non-increasing spouse count starting with ``k``. ``run`` counts the
    equal-sized branches placed so far, including this one. Nodes left after
    the last branch are free parents or children."""
    head = comb(n, k + 1) * (k + 1)
    rest = n - k - 1
    if m == 1:
        return Fraction(head * 2**rest, run)
    total = Fraction(0)
    for k2 in range(1, min(k, rest - 2 * (m - 2) - 1) + 1):
        total += _branch_sets(rest, m - 1, k2, run + 1 if k2 == k else 1)
    return Fraction(head, run) * total


@lru_cache(maxsize=None)
def count_mbp(n: int) -> int:
    """Number of labelled blanket polytrees for a blanket of ``n`` members.

    Same decomposition as :func:`count_mbp_qm` (colliders ``m``, largest
    branch first, remainder recursively), but each run of ``j`` equal-sized
    branches is divided by ``j!`` so every labelled structure counts once.
    """
    if n < 0:
        raise ValueError("blanket size must be non-negative")
    f = Fraction(2**n)
    for m in range(1, n // 2 + 1):
        for k in range(1, n - 2 * m + 2):
            f += _branch_sets(n, m, k, 1)
    if f.denominator != 1:
        raise ArithmeticError(f"non-integral polytree count {f} for n={n}")
    return int(f)


@lru_cache(maxsize=None)
def _count_lowest_first(n: int) -> int:
    # the lowest remaining label is a parent, a child, or sits in a branch of size b
    if n == 0:
        return 1
    total = 2 * _count_lowest_first(n - 1)
    for b in range(2, n + 1):
        total += comb(n - 1, b - 1) * b * _count_lowest_first(n - b)
    return total


# -- enumeration ------------------------------------------------------------


def _role_assignments(members: tuple[int, ...]):
    """Yield (parents, children, branches) for every labelled structure."""
    if not members:
        yield (), (), {}
        return
    first, rest = members[0], members[1:]
    for parents, children, branches in _role_assignments(rest):
        yield (first,) + parents, children, branches
        yield parents, (first,) + children, branches
    for b in range(2, len(members) + 1):
        for companions in itertools.combinations(rest, b - 1):
            group = (first,) + companions
            remaining = tuple(m for m in rest if m not in companions)
            for collider in group:
                spouses = tuple(g for g in group if g != collider)
                for parents, children, branches in _role_assignments(remaining):
                    yield parents, children, {**branches, collider: spouses}


def enumerate_mbp(target: int, mb_set: Iterable[int], cap: int = ENUMERATION_CAP) -> list[MbPolytree]:
    """Every labelled blanket polytree, sorted by canonical edge list."""
    members = tuple(sorted(set(mb_set)))
    if target in members:
        raise StructureError("target cannot be a blanket member")
    if len(members) > cap:
        raise ValueError(f"blanket of size {len(members)} exceeds the enumeration cap {cap}")
    trees = [MbPolytree.from_roles(target, p, c, br) for p, c, br in _role_assignments(members)]
    trees.sort(key=MbPolytree.canonical)
    return trees


# -- unranking and sampling -------------------------------------------------


def _unrank_combination(items: tuple[int, ...], k: int, rank: int) -> tuple[int, ...]:
    """Lexicographic ``rank``-th k-subset of ``items``."""
    out = []
    start = 0
    for slot in range(k):
        for i in range(start, len(items)):
            block = comb(len(items) - i - 1, k - slot - 1)
            if rank < block:
                out.append(items[i])
                start = i + 1
                break
            rank -= block
    return tuple(out)


def unrank_mbp(target: int, mb_set: Iterable[int], rank: int) -> MbPolytree:
    """Decode ``rank`` in ``[0, count_mbp(n))`` into a distinct polytree."""
    members = tuple(sorted(set(mb_set)))
    if target in members:
        raise StructureError("target cannot be a blanket member")
    total = _count_lowest_first(len(members))
    if not 0 <= rank < total:
        raise ValueError(f"rank {rank} outside [0, {total})")
    parents, children, branches = [], [], {}
    while members:
        n = len(members)
        first, rest = members[0], members[1:]
        sub = _count_lowest_first(n - 1)
        if rank < sub:
            parents.append(first)
            members = rest
            continue
        rank -= sub
        if rank < sub:
            children.append(first)
            members = rest
            continue
        rank -= sub
        for b in range(2, n + 1):
            tail = _count_lowest_first(n - b)
            block = comb(n - 1, b - 1) * b * tail
            if rank < block:
                companions = _unrank_combination(rest, b - 1, rank // (b * tail))
                rank %= b * tail
                group = (first,) + companions
                collider = group[rank // tail]
                rank %= tail
                branches[collider] = tuple(g for g in group if g != collider)
                members = tuple(m for m in rest if m not in companions)
                break
            rank -= block
    return MbPolytree.from_roles(target, parents, children, branches)


def _uniform_below(rng: np.random.Generator, bound: int) -> int:
    if bound <= np.iinfo(np.int64).max:
        return int(rng.integers(0, bound))
    nbytes = (bound.bit_length() + 7) // 8
    while True:
        x = int.from_bytes(rng.bytes(nbytes), "little") >> (8 * nbytes - bound.bit_length())
        if x < bound:
            return x


def sample_mbp_uniform(target: int, mb_set: Iterable[int], rng: np.random.Generator) -> MbPolytree:
    """Exactly uniform draw over all labelled blanket polytrees."""
    members = tuple(sorted(set(mb_set)))
    return unrank_mbp(target, members, _uniform_below(rng, count_mbp(len(members))))


def sample_mbp_random_dag(
    target: int,
    mb_set: Iterable[int],
    rng: np.random.Generator,
    max_fanin: int | None = None,
    max_tries: int = 10_000,
) -> MbPolytree:
    """Random-DAG generator with undirected-loop suppression, retried until
    the result is a polytree with the requested blanket.

    Not uniform over blanket polytrees; kept to compare against the uniform
    sampler.
    """
    members = sorted(set(mb_set))
    nodes = [target] + members
    fanin = len(nodes) - 1 if max_fanin is None else max_fanin
    for _ in range(max_tries):
        order = [nodes[i] for i in rng.permutation(len(nodes))]
        comp = {v: v for v in nodes}

        def find(v):
            while comp[v] != v:
                comp[v] = comp[comp[v]]
                v = comp[v]
            return v

        edges = set()
        for pos, v in enumerate(order):
            preds = order[:pos]
            k = int(rng.integers(0, min(len(preds), fanin) + 1))
            for p in rng.choice(len(preds), size=k, replace=False) if k else []:
                u = preds[int(p)]
                if find(u) == find(v):
                    continue
                comp[find(u)] = find(v)
                edges.add((u, v))
        tree = MbPolytree(target, frozenset(members), frozenset(edges))
        if is_valid_mbp(tree, target, members):
            return tree
    raise RuntimeError("random-DAG polytree sampler did not produce a valid structure")
