"""IAMB with the G^2 conditional mutual information test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.stats import chi2

from .core import DataError, DiscreteDataset, MarkovBlanket, cell_index


@dataclass(frozen=True)
class CiTestResult:
    mi: float
    g2: float
    dof: int
    p_value: float
    independent: bool
    insufficient: bool = False


def conditional_mi(
    dataset: DiscreteDataset, x: int, y: int, z: Iterable[int] = (), significance: float = 0.01
) -> CiTestResult:
    """Plug-in I(x; y | z) in nits and its G^2 = 2 N I test.

    Degrees of freedom are (r_x - 1)(r_y - 1) prod r_z with no correction for
    empty cells. With fewer than 5 records per degree of freedom the test
    declares independence and sets ``insufficient``.
    """
    z = sorted(set(z))
    if x == y or x in z or y in z:
        raise DataError("x, y and the conditioning set must be disjoint")
    n = dataset.n_records
    if n == 0:
        raise DataError("cannot test on an empty dataset")
    rx, ry = dataset.variables[x].arity, dataset.variables[y].arity
    zi, rz = cell_index(dataset, z)
    dof = (rx - 1) * (ry - 1) * rz
    key = (zi * rx + dataset.records[:, x]) * ry + dataset.records[:, y]
    uniq, n_zxy = np.unique(key, return_counts=True)
    zx_key, zc = uniq // ry, uniq // (rx * ry)
    zy_key = zc * ry + uniq % ry
    n_zx = _lookup(zi * rx + dataset.records[:, x], zx_key)
    n_zy = _lookup(zi * ry + dataset.records[:, y], zy_key)
    n_z = _lookup(zi, zc)
    mi = float(np.sum(n_zxy * np.log(n_zxy * n_z / (n_zx * n_zy))) / n)
    mi = max(mi, 0.0)
    g2 = 2.0 * n * mi
    p = float(chi2.sf(g2, dof))
    if n < 5 * dof:
        return CiTestResult(mi, g2, dof, p, True, True)
    return CiTestResult(mi, g2, dof, p, p > significance)


def _lookup(keys: np.ndarray, query: np.ndarray) -> np.ndarray:
    uniq, cnt = np.unique(keys, return_counts=True)
    return cnt[np.searchsorted(uniq, query)].astype(float)


def iamb(dataset: DiscreteDataset, target: int, significance: float = 0.01) -> MarkovBlanket:
    """Grow by maximal conditional MI while the test rejects independence,
    then shrink members (ascending index) that test independent of the
    target given the rest."""
    if dataset.n_records == 0:
        raise DataError("cannot run IAMB on an empty dataset")
    mb: list[int] = []
    candidates = [v for v in range(dataset.n_vars) if v != target]
    while True:
        pool = [v for v in candidates if v not in mb]
        if not pool:
            break
        best, best_mi = None, -math.inf
        for v in pool:
            res = conditional_mi(dataset, target, v, mb, significance)
            if res.mi > best_mi:
                best, best_mi, best_res = v, res.mi, res
        if best_res.independent:
            break
        mb.append(best)
    for v in sorted(mb):
        rest = [u for u in mb if u != v]
        if conditional_mi(dataset, target, v, rest, significance).independent:
            mb.remove(v)
    return MarkovBlanket(target, frozenset(mb))
