"""Greedy Markov blanket discovery and symmetry enforcement."""
from __future__ import annotations

import logging
from collections import OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .core import DiscreteDataset, MarkovBlanket
from .polytree import ENUMERATION_CAP, count_mbp, enumerate_mbp, sample_mbp_random_dag, sample_mbp_uniform
from .scoring import UNIFORM, DirichletPrior, LocalScorer, cpt_mml
from .streams import derive_rng

log = logging.getLogger(__name__)

MODELS = ("cpt", "nb", "mbp", "iamb")
SYMMETRY_MODES = ("union", "intersection", "none")
DEFAULT_SYMMETRY = {"cpt": "union", "nb": "intersection", "mbp": "union", "iamb": "none"}


@dataclass(frozen=True)
class SearchConfig:
    model: str = "cpt"
    prior: DirichletPrior = UNIFORM
    mbp_samples: int = 100
    symmetry: str | None = None
    seed: int = 0
    ensemble: str = "mixture"
    sampler: str = "uniform"
    estimator: str = "posterior_mean"
    significance: float = 0.01

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.model == "mbp" and self.mbp_samples < 1:
            raise ValueError("mbp_samples must be >= 1")
        if self.symmetry is not None and self.symmetry not in SYMMETRY_MODES:
            raise ValueError(f"unknown symmetry mode {self.symmetry!r}")
        if self.ensemble not in ("mixture", "mean"):
            raise ValueError(f"unknown ensemble mode {self.ensemble!r}")
        if self.sampler not in ("uniform", "random_dag"):
            raise ValueError(f"unknown sampler {self.sampler!r}")

    @property
    def symmetry_mode(self) -> str:
        return self.symmetry or DEFAULT_SYMMETRY[self.model]


@dataclass(frozen=True)
class MarkovBlanketSet:
    blankets: Mapping[int, frozenset[int]]
    names: tuple[str, ...]
    method: str = ""
    seed: int = 0
    prior: DirichletPrior = UNIFORM
    symmetry: str = "none"
    dataset_hash: str = ""
    n_records: int = 0
    extra: Mapping = field(default_factory=dict)

    def __getitem__(self, target: int) -> frozenset[int]:
        return self.blankets[target]

    def to_dict(self) -> dict:
        from .formats import blankets_to_dict

        meta = {"dataset_hash": self.dataset_hash, "n_records": self.n_records}
        meta.update(self.extra)
        return blankets_to_dict(
            self.names, self.blankets, self.method, self.seed, self.prior.to_json(), self.symmetry, meta
        )


def greedy_forward(
    target: int, n_vars: int, score: Callable[[frozenset[int], int, int | None], float]
) -> tuple[frozenset[int], list[float]]:
    """Forward selection from the empty set.

    ``score(members, round, candidate)`` returns a message length. Each round
    admits the best candidate only if it strictly shortens the incumbent;
    ties go to the lowest index. Returns the blanket and the incumbent score
    after every admission (the first entry is the empty model).
    """
    chosen: frozenset[int] = frozenset()
    trace = [score(chosen, 0, None)]
    unchecked = [j for j in range(n_vars) if j != target]
    rnd = 0
    while unchecked:
        best_j, best = None, None
        for j in unchecked:
            s = score(chosen | {j}, rnd, j)
            if best is None or s < best:
                best_j, best = j, s
        if not best < trace[-1]:
            break
        chosen = chosen | {best_j}
        unchecked.remove(best_j)
        trace.append(best)
        rnd += 1
    return chosen, trace


class _LruScorer(LocalScorer):
    MAX_FACTORS = 512

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._cache = OrderedDict()

    def factor(self, child, parents):
        key = (child, frozenset(parents))
        hit = self._cache.get(key)
        if hit is not None:
            self._cache.move_to_end(key)
            return hit
        hit = super().factor(child, parents)
        while len(self._cache) > self.MAX_FACTORS:
            self._cache.popitem(last=False)
        return hit


def _fixed_score(dataset: DiscreteDataset, target: int, config: SearchConfig):
    if config.model == "cpt":
        return lambda members, rnd, cand: cpt_mml(dataset, target, members, config.prior)
    if config.model == "nb":
        from .polytree import MbPolytree

        scorer = _LruScorer(dataset, target, config.prior, config.estimator)
        return lambda members, rnd, cand: scorer.tree_mml(MbPolytree.star(target, children=members))
    raise ValueError(f"model {config.model!r} is not a fixed local model")


def discover_mb_fixed(dataset: DiscreteDataset, target: int, config: SearchConfig) -> MarkovBlanket:
    """Greedy search with a CPT or Naive Bayes local model."""
    members, _ = greedy_forward(target, dataset.n_vars, _fixed_score(dataset, target, config))
    return MarkovBlanket(target, members)


def polytree_ensemble(target: int, members: frozenset[int], config: SearchConfig, rnd: int, cand: int | None):
    """Every polytree when there are at most ``mbp_samples`` of them, else
    ``mbp_samples`` random draws from a stream keyed by (target, round, candidate)."""
    n = len(members)
    if n <= ENUMERATION_CAP and count_mbp(n) <= config.mbp_samples:
        return enumerate_mbp(target, members)
    rng = derive_rng(config.seed, "mbp", target, rnd, -1 if cand is None else cand)
    draw = sample_mbp_uniform if config.sampler == "uniform" else sample_mbp_random_dag
    return [draw(target, members, rng) for _ in range(config.mbp_samples)]


def _mbp_score(dataset: DiscreteDataset, target: int, config: SearchConfig):
    scorer = _LruScorer(dataset, target, config.prior, config.estimator)

    def score(members, rnd, cand):
        return scorer.ensemble_mml(polytree_ensemble(target, members, config, rnd, cand), config.ensemble)

    return score


def discover_mb_mbp(dataset: DiscreteDataset, target: int, config: SearchConfig) -> MarkovBlanket:
    """Greedy search scoring each candidate blanket by a polytree ensemble."""
    members, _ = greedy_forward(target, dataset.n_vars, _mbp_score(dataset, target, config))
    return MarkovBlanket(target, members)


def discover_mb(dataset: DiscreteDataset, target: int, config: SearchConfig) -> MarkovBlanket:
    if config.model == "mbp":
        return discover_mb_mbp(dataset, target, config)
    if config.model == "iamb":
        from .iamb import iamb

        return iamb(dataset, target, config.significance)
    return discover_mb_fixed(dataset, target, config)


def enforce_symmetry(blankets: Mapping[int, frozenset[int]], mode: str) -> dict[int, frozenset[int]]:
    """Make j in MB_i hold exactly when i in MB_j.

    Targets and their members are visited in ascending order and each change
    is visible to later visits. ``union`` adds the missing reciprocal,
    ``intersection`` drops the unreciprocated member.
    """
    if mode not in SYMMETRY_MODES:
        raise ValueError(f"unknown symmetry mode {mode!r}")
    out = {t: set(m) for t, m in blankets.items()}
    if mode != "none":
        for i in sorted(out):
            for j in sorted(out[i]):
                if i not in out.setdefault(j, set()):
                    if mode == "union":
                        out[j].add(i)
                    else:
                        out[i].discard(j)
    return {t: frozenset(m) for t, m in sorted(out.items())}


def _discover_task(args):
    dataset, target, config = args
    return discover_mb(dataset, target, config).members


def discover_all(dataset: DiscreteDataset, config: SearchConfig, jobs: int = 1) -> MarkovBlanketSet:
    """Discover every variable's blanket, then enforce symmetry."""
    if dataset.n_records == 0:
        raise ValueError("cannot discover blankets from an empty dataset")
    tasks = [(dataset, t, config) for t in range(dataset.n_vars)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            found = list(pool.map(_discover_task, tasks))
    else:
        found = [_discover_task(t) for t in tasks]
    raw = {t: m for t, m in enumerate(found)}
    mode = config.symmetry_mode
    log.debug("raw blankets %s; enforcing %s symmetry", raw, mode)
    extra = {"mbp_samples": config.mbp_samples} if config.model == "mbp" else {}
    if config.model == "iamb":
        extra = {"significance": config.significance}
    return MarkovBlanketSet(
        blankets=enforce_symmetry(raw, mode),
        names=tuple(dataset.names),
        method=config.model,
        seed=config.seed,
        prior=config.prior,
        symmetry=mode,
        dataset_hash=dataset.digest(),
        n_records=dataset.n_records,
        extra=extra,
    )
