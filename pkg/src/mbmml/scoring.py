"""Minimum Message Length scores, in nits.

Multi-state and CPT lengths are closed-form Dirichlet-multinomial code
lengths evaluated with log-gamma. Naive Bayes and polytree scores are
conditional code lengths of the target given its blanket: an adaptive code
for every local factor, corrected by a per-record normaliser built from
point estimates (see :func:`point_estimate`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .core import DataError, DiscreteDataset, build_contingency, cell_index
from .polytree import MbPolytree, is_valid_mbp

#: ln(pi * e / 6), the per-parameter precision cost added by the CPT score
LN_PI_E_6 = math.log(math.pi * math.e / 6.0)

ESTIMATORS = ("posterior_mean", "ml")


@dataclass(frozen=True)
class DirichletPrior:
    """Dirichlet concentration for a variable's states.

    A scalar ``concentration`` is the symmetric shorthand applied to every
    state of whichever variable is being coded. A tuple fixes one value per
    state and only fits variables of that arity.
    """

    concentration: float | tuple[float, ...] = 1.0

    def __post_init__(self):
        c = self.concentration
        if isinstance(c, (list, tuple, np.ndarray)):
            c = tuple(float(a) for a in c)
            object.__setattr__(self, "concentration", c)
            vals = c
        else:
            object.__setattr__(self, "concentration", float(c))
            vals = (float(c),)
        if not all(a > 0 and math.isfinite(a) for a in vals):
            raise ValueError(f"Dirichlet concentrations must be positive, got {self.concentration!r}")

    @property
    def symmetric(self) -> bool:
        return not isinstance(self.concentration, tuple)

    def alphas(self, r: int) -> np.ndarray:
        if self.symmetric:
            return np.full(r, self.concentration)
        if len(self.concentration) != r:
            raise DataError(f"prior has {len(self.concentration)} concentrations, variable has {r} states")
        return np.asarray(self.concentration)

    def alpha0(self, r: int) -> float:
        return float(self.alphas(r).sum())

    def to_json(self):
        return self.concentration if self.symmetric else list(self.concentration)


UNIFORM = DirichletPrior(1.0)


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - m), axis=axis)) + np.squeeze(m, axis=axis)
    return out


def multistate_mml(counts: Sequence[int], prior: DirichletPrior = UNIFORM) -> float:
    """ln[(N+a0-1)! prod (a_k-1)! / ((a0-1)! prod (n_k+a_k-1)!)] via log-gamma."""
    n = np.asarray(counts, dtype=float)
    if n.ndim != 1 or n.size < 2:
        raise DataError("need a histogram over at least 2 states")
    if (n < 0).any():
        raise DataError("counts must be non-negative")
    a = prior.alphas(n.size)
    a0 = a.sum()
    value = gammaln(n.sum() + a0) - gammaln(a0) + np.sum(gammaln(a) - gammaln(n + a))
    return max(float(value), 0.0)


def point_estimate(n_jk, n_j, alpha_k, alpha0, estimator: str = "posterior_mean"):
    """Parameter estimate used inside the per-record normaliser."""
    if estimator == "posterior_mean":
        return (n_jk + alpha_k) / (n_j + alpha0)
    if estimator == "ml":
        n_j = np.asarray(n_j, dtype=float)
        with np.errstate(invalid="ignore", divide="ignore"):
            p = np.asarray(n_jk, dtype=float) / n_j
        # unseen parent cell: fall back to the prior mean
        return np.where(n_j > 0, p, alpha_k / alpha0)
    raise ValueError(f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}")


class _Counts:
    """Counts over integer keys, dense when small and sorted-sparse otherwise."""

    DENSE_LIMIT = 1 << 22

    def __init__(self, keys: np.ndarray, size: int):
        if size <= self.DENSE_LIMIT:
            self.table = np.bincount(keys, minlength=size)
            self.uniq = None
        else:
            self.uniq, self.cnt = np.unique(keys, return_counts=True)

    def observed(self) -> np.ndarray:
        if self.uniq is None:
            return self.table[self.table > 0]
        return self.cnt

    def lookup(self, q: np.ndarray) -> np.ndarray:
        if self.uniq is None:
            return self.table[q]
        pos = np.searchsorted(self.uniq, q)
        pos = np.minimum(pos, self.uniq.size - 1)
        return np.where(self.uniq[pos] == q, self.cnt[pos], 0)


@dataclass(frozen=True)
class FactorTerms:
    """One local factor p(child | parents) evaluated on a dataset.

    ``adaptive`` is the adaptive (marginal likelihood) code length of the
    child column, ``plugin`` the per-record log point estimate of the observed
    value, and ``by_target`` (only when the factor mentions the target) the
    per-record log estimate with the target set to each of its states.
    """

    adaptive: float
    n_cells: int
    plugin: np.ndarray
    by_target: np.ndarray | None


def factor_terms(
    dataset: DiscreteDataset,
    child: int,
    parents: Iterable[int],
    prior: DirichletPrior = UNIFORM,
    target: int | None = None,
    estimator: str = "posterior_mean",
    per_record: bool = True,
) -> FactorTerms:
    parents = sorted(set(parents))
    if child in parents:
        raise DataError(f"variable {child} cannot be its own parent")
    if dataset.n_records == 0:
        raise DataError("cannot score an empty dataset")
    r = dataset.variables[child].arity
    alphas = prior.alphas(r)
    a0 = float(alphas.sum())
    idx, n_cells = cell_index(dataset, parents)
    x = dataset.records[:, child]
    joint = _Counts(idx * r + x, n_cells * r)
    cells = _Counts(idx, n_cells)

    n_jk = joint.observed()
    n_j = cells.observed()
    if prior.symmetric:
        a_k = alphas[0]
        jk_part = np.sum(gammaln(n_jk + a_k)) - n_jk.size * gammaln(a_k)
    else:
        # need the state of each observed (cell, state) pair
        keys = np.unique(idx * r + x)
        st = keys % r
        cnt = joint.lookup(keys)
        jk_part = np.sum(gammaln(cnt + alphas[st]) - gammaln(alphas[st]))
    adaptive = float(np.sum(gammaln(n_j + a0)) - n_j.size * gammaln(a0) - jk_part)

    def logp(cell_idx, state):
        p = point_estimate(joint.lookup(cell_idx * r + state), cells.lookup(cell_idx), alphas[state], a0, estimator)
        with np.errstate(divide="ignore"):
            return np.log(p)

    if not per_record:
        return FactorTerms(max(adaptive, 0.0), n_cells, np.empty(0), None)
    plugin = logp(idx, x)
    by_target = None
    if target is not None and (target == child or target in parents):
        rt = dataset.variables[target].arity
        by_target = np.empty((dataset.n_records, rt))
        if target == child:
            for s in range(rt):
                by_target[:, s] = logp(idx, np.full_like(x, s))
        else:
            mult = 1
            for p in reversed(parents):
                if p == target:
                    break
                mult *= dataset.variables[p].arity
            base = idx - dataset.records[:, target] * mult
            for s in range(rt):
                by_target[:, s] = logp(base + s * mult, x)
    return FactorTerms(max(adaptive, 0.0), n_cells, plugin, by_target)


def adaptive_code_length(
    dataset: DiscreteDataset, child: int, parents: Iterable[int] = (), prior: DirichletPrior = UNIFORM
) -> float:
    """CPT code length of ``child`` given ``parents`` without the precision term."""
    return factor_terms(dataset, child, parents, prior, per_record=False).adaptive


def cpt_mml(
    dataset: DiscreteDataset, target: int, parent_set: Iterable[int] = (), prior: DirichletPrior = UNIFORM
) -> float:
    """Multi-state code length summed over every parent cell, plus the
    r_s (r_i - 1) / 2 * ln(pi e / 6) precision term."""
    parents = sorted(set(parent_set))
    if target in parents:
        raise DataError(f"target {target} also appears in the parent set")
    if dataset.n_records == 0:
        raise DataError("cannot score an empty dataset")
    terms = factor_terms(dataset, target, parents, prior, per_record=False)
    r = dataset.variables[target].arity
    return terms.adaptive + terms.n_cells * (r - 1) / 2.0 * LN_PI_E_6


def cpt_mml_dense(
    dataset: DiscreteDataset, target: int, parent_set: Iterable[int] = (), prior: DirichletPrior = UNIFORM
) -> float:
    """Same value as :func:`cpt_mml`, computed cell by cell from the full
    contingency table. Only practical for small parent sets."""
    table = build_contingency(dataset, target, parent_set)
    total = sum(multistate_mml(row, prior) for row in table.counts)
    return total + table.n_cells * (table.target_arity - 1) / 2.0 * LN_PI_E_6


@dataclass(frozen=True)
class TreeTerms:
    """Per-record log p(target | blanket) under one polytree, and the part of
    its message that is not explained by those point-estimate probabilities."""

    log_cond: np.ndarray
    structure_cost: float

    @property
    def total(self) -> float:
        return float(-self.log_cond.sum() + self.structure_cost)


class LocalScorer:
    """Scores local structures around one target, caching factor terms.

    Factors are keyed by (child, parent set) so trees that share factors,
    which is most of them inside a search round, reuse the counts.
    """

    def __init__(
        self,
        dataset: DiscreteDataset,
        target: int,
        prior: DirichletPrior = UNIFORM,
        estimator: str = "posterior_mean",
    ):
        if estimator not in ESTIMATORS:
            raise ValueError(f"unknown estimator {estimator!r}")
        if dataset.n_records == 0:
            raise DataError("cannot score an empty dataset")
        if not 0 <= target < dataset.n_vars:
            raise IndexError(f"target {target} out of range")
        self.dataset = dataset
        self.target = target
        self.prior = prior
        self.estimator = estimator
        self._cache: dict[tuple[int, frozenset[int]], FactorTerms] = {}

    def factor(self, child: int, parents: Iterable[int]) -> FactorTerms:
        key = (child, frozenset(parents))
        hit = self._cache.get(key)
        if hit is None:
            hit = factor_terms(self.dataset, child, key[1], self.prior, self.target, self.estimator)
            self._cache[key] = hit
        return hit

    def tree_terms(self, tree: MbPolytree) -> TreeTerms:
        t = self.target
        if tree.target != t:
            raise DataError(f"tree is rooted at {tree.target}, scorer at {t}")
        n = self.dataset.n_records
        rt = self.dataset.variables[t].arity
        joint = np.zeros((n, rt))
        cost = 0.0
        for v in sorted(tree.nodes):
            f = self.factor(v, tree.parents_of(v))
            # adaptive length minus the plug-in length of the same column
            cost += f.adaptive + float(f.plugin.sum())
            if f.by_target is not None:
                joint += f.by_target
        x = self.dataset.records[:, t]
        log_cond = joint[np.arange(n), x] - _logsumexp(joint, axis=1)
        return TreeTerms(log_cond, cost)

    def tree_mml(self, tree: MbPolytree) -> float:
        return self.tree_terms(tree).total

    def ensemble_mml(self, trees: Sequence[MbPolytree], mode: str = "mixture") -> float:
        """Score a blanket by an equally weighted set of polytrees.

        ``mixture`` averages the per-record conditional probabilities across
        trees before taking the negative log, and adds the mean structure
        cost. ``mean`` averages the trees' individual message lengths.
        """
        if not trees:
            raise ValueError("need at least one tree")
        terms = [self.tree_terms(tr) for tr in trees]
        if mode == "mean":
            return float(np.mean([tt.total for tt in terms]))
        if mode != "mixture":
            raise ValueError(f"unknown ensemble mode {mode!r}")
        stacked = np.stack([tt.log_cond for tt in terms])
        log_mix = _logsumexp(stacked, axis=0) - math.log(len(terms))
        return float(-log_mix.sum() + np.mean([tt.structure_cost for tt in terms]))


def mbp_mml(
    dataset: DiscreteDataset,
    target: int,
    tree: MbPolytree,
    prior: DirichletPrior = UNIFORM,
    estimator: str = "posterior_mean",
) -> float:
    """Conditional message length of the target under one blanket polytree."""
    if not is_valid_mbp(tree, target, tree.members):
        raise DataError("invalid Markov blanket polytree")
    if target in tree.members:
        raise DataError("target listed among blanket members")
    return LocalScorer(dataset, target, prior, estimator).tree_mml(tree)


def nb_mml(
    dataset: DiscreteDataset,
    target: int,
    child_set: Iterable[int] = (),
    prior: DirichletPrior = UNIFORM,
    estimator: str = "posterior_mean",
) -> float:
    """Naive Bayes conditional message length: the star polytree with every
    blanket member a child of the target."""
    children = frozenset(child_set)
    if target in children:
        raise DataError(f"target {target} also appears in the child set")
    return LocalScorer(dataset, target, prior, estimator).tree_mml(MbPolytree.star(target, children=children))
