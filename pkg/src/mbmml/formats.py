"""Reading and writing networks (JSON), datasets (CSV) and blanket sets (JSON).

Writers are byte-deterministic: fixed key order, ``\\n`` line endings and
``repr`` float formatting.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import BayesianNetwork, Dag, DataError, DiscreteDataset, StructureError, Variable


def network_to_dict(bn: BayesianNetwork) -> dict:
    names = bn.dag.names
    return {
        "variables": [{"name": v.name, "arity": v.arity} for v in bn.variables],
        "edges": [[names[a], names[b]] for a, b in bn.dag.sorted_edges()],
        "cpts": {
            names[i]: {
                "parent_order": [names[p] for p in bn.parent_orders[i]],
                "rows": [[float(x) for x in row] for row in bn.cpts[i]],
            }
            for i in range(bn.dag.n_vars)
        },
    }


def network_from_dict(obj: Mapping) -> BayesianNetwork:
    try:
        variables = [Variable(str(v["name"]), int(v["arity"])) for v in obj["variables"]]
        names = {v.name: i for i, v in enumerate(variables)}
        edges = []
        for k, (a, b) in enumerate(obj.get("edges", [])):
            if a not in names or b not in names:
                raise DataError(f"edges[{k}]: unknown variable in [{a!r}, {b!r}]")
            edges.append((names[a], names[b]))
        dag = Dag(tuple(variables), frozenset(edges))
        cpts_obj = obj["cpts"]
        orders, tables = [], []
        for v in variables:
            if v.name not in cpts_obj:
                raise DataError(f"cpts: missing entry for {v.name!r}")
            entry = cpts_obj[v.name]
            order = []
            for p in entry.get("parent_order", []):
                if p not in names:
                    raise DataError(f"cpts.{v.name}.parent_order: unknown variable {p!r}")
                order.append(names[p])
            orders.append(tuple(order))
            tables.append(np.asarray(entry["rows"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (DataError, StructureError)):
            raise
        raise DataError(f"malformed network JSON: {exc!r}") from exc
    return BayesianNetwork(dag, tuple(orders), tuple(tables))


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def save_network(bn: BayesianNetwork, path: str | Path) -> None:
    Path(path).write_text(dumps_json(network_to_dict(bn)), encoding="utf-8", newline="\n")


def load_network(path: str | Path) -> BayesianNetwork:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return network_from_dict(obj)


def dataset_to_csv(dataset: DiscreteDataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(dataset.names)
    w.writerows(dataset.records.tolist())
    return buf.getvalue()


def save_dataset(dataset: DiscreteDataset, path: str | Path) -> None:
    Path(path).write_text(dataset_to_csv(dataset), encoding="utf-8", newline="\n")


def dataset_from_csv(text: str, arities: Mapping[str, int] | None = None, source: str = "<csv>") -> DiscreteDataset:
    """Parse a CSV of state indices.

    Columns whose cells are not all integers are treated as categorical: the
    sorted distinct labels map to 0, 1, ... and the mapping is kept under
    ``metadata["state_labels"]``. Arity comes from ``arities`` when given,
    otherwise from the largest observed index (at least 2).
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r]
    if not rows:
        raise DataError(f"{source}: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    body = rows[1:]
    for ln, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DataError(f"{source}: line {ln}: expected {len(header)} fields, found {len(r)}")
    cols = list(zip(*body)) if body else [() for _ in header]
    data = np.zeros((len(body), len(header)), dtype=np.int64)
    labels = {}
    for j, name in enumerate(header):
        cells = [c.strip() for c in cols[j]]
        try:
            values = [int(c) for c in cells]
        except ValueError:
            uniq = sorted(set(cells))
            labels[name] = uniq
            lookup = {u: k for k, u in enumerate(uniq)}
            values = [lookup[c] for c in cells]
        data[:, j] = values
    variables = []
    for j, name in enumerate(header):
        col = data[:, j]
        if arities is not None and name in arities:
            r = int(arities[name])
        elif name in labels:
            r = max(2, len(labels[name]))
        else:
            r = max(2, int(col.max()) + 1 if col.size else 2)
        if col.size and (col.min() < 0 or col.max() >= r):
            bad = int(np.flatnonzero((col < 0) | (col >= r))[0])
            raise DataError(f"{source}: line {bad + 2}, column {name!r}: value {col[bad]} outside [0, {r})")
        variables.append(Variable(name, r))
    meta = {"state_labels": labels} if labels else {}
    return DiscreteDataset(tuple(variables), data, meta)


def load_dataset(path: str | Path, arities: Mapping[str, int] | None = None) -> DiscreteDataset:
    return dataset_from_csv(Path(path).read_text(encoding="utf-8"), arities, source=str(path))


def blankets_to_dict(
    names: Sequence[str],
    blankets: Mapping[int, frozenset[int]],
    method: str,
    seed: int,
    alpha,
    symmetry: str,
    extra: Mapping | None = None,
) -> dict:
    out = {
        "method": method,
        "seed": seed,
        "alpha": alpha,
        "symmetry": symmetry,
        "blankets": {
            names[t]: sorted(names[m] for m in blankets[t]) for t in sorted(blankets)
        },
    }
    if extra:
        out.update(extra)
    return out


def load_blankets(path: str | Path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(obj, dict) or not isinstance(obj.get("blankets"), dict):
        raise DataError(f"{path}: missing 'blankets' object")
    return obj
