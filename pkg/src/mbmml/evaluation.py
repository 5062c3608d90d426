"""Blanket accuracy metrics, confidence intervals and the experiment grid."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
import traceback
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import BayesianNetwork, markov_blanket_of
from .scoring import DirichletPrior
from .search import SearchConfig, discover_all
from .streams import derive_rng
from .synth import NetworkSpec, ancestral_sample, random_dag, random_parameters

log = logging.getLogger(__name__)

METRICS = ("edit_distance", "precision", "recall")
REPORT_COLUMNS = ["method", "n_vars", "max_fanin", "sample_size", "metric", "mean", "ci_half_width", "n_observations"]


@dataclass(frozen=True)
class TargetScore:
    target: int
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    edit_distance: int
    true_size: int = 0
    learned_size: int = 0


def score_mb(true_mb: Iterable[int], learned_mb: Iterable[int], target: int = -1) -> TargetScore:
    """Counts against the true blanket; an empty denominator scores 1."""
    t, l = set(true_mb), set(learned_mb)
    if target in t or target in l:
        raise ValueError(f"target {target} cannot be a member of its own blanket")
    tp, fp, fn = len(t & l), len(l - t), len(t - l)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    return TargetScore(target, tp, fp, fn, precision, recall, fp + fn, len(t), len(l))


@dataclass(frozen=True)
class Summary:
    mean: float
    ci_half_width: float
    n: int


def mean_ci(values: Sequence[float]) -> Summary:
    """Mean with a normal-approximation 95% half-width, 1.96 * s / sqrt(m)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValueError("need at least 2 observations for a confidence interval")
    v = np.sort(v)
    return Summary(float(v.mean()), float(1.96 * v.std(ddof=1) / math.sqrt(v.size)), int(v.size))


def aggregate(reports: Sequence[TargetScore], metrics: Sequence[str] = METRICS) -> dict[str, Summary]:
    if len(reports) < 2:
        raise ValueError("need at least 2 per-target reports to aggregate")
    return {m: mean_ci([getattr(r, m) for r in reports]) for m in metrics}


def evaluate_blankets(bn: BayesianNetwork, blankets: Mapping[int, Iterable[int]]) -> list[TargetScore]:
    return [
        score_mb(markov_blanket_of(bn.dag, t).members, blankets[t], t) for t in sorted(blankets)
    ]


def _fmt(x: float) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6f}"


def report_rows(method: str, n_vars: int, max_fanin: int, sample_size: int, scores: Sequence[TargetScore]) -> list[list]:
    rows = []
    for m in METRICS:
        values = [getattr(s, m) for s in scores]
        if len(values) >= 2:
            s = mean_ci(values)
            rows.append([method, n_vars, max_fanin, sample_size, m, _fmt(s.mean), _fmt(s.ci_half_width), s.n])
        else:
            mean = float(np.mean(values)) if values else float("nan")
            rows.append([method, n_vars, max_fanin, sample_size, m, _fmt(mean), "nan", len(values)])
    return rows


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")


# -- experiment grid ----------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    n_vars: int = 15
    max_fanin: int = 3
    max_arity: int = 3
    gen_alpha: float = 1.0
    n_networks: int = 3
    n_datasets: int = 3
    sample_sizes: tuple[int, ...] = (100, 500, 2000, 5000)
    seed: int = 0
    methods: tuple[str, ...] = ("cpt", "nb", "mbp", "iamb")
    alpha: float = 1.0
    mbp_samples: int = 100
    significance: float = 0.01
    # scoring concentrations for the CPT prior sweep; empty disables it
    alpha_sweep: tuple[float, ...] = ()
    # generating concentrations for the true-vs-uniform prior comparison
    gen_alpha_sweep: tuple[float, ...] = ()

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown experiment config keys: {sorted(unknown)}")
        kw = dict(obj)
        for k in ("sample_sizes", "methods", "alpha_sweep", "gen_alpha_sweep"):
            if k in kw:
                kw[k] = tuple(kw[k])
        return cls(**kw)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def network_for(cfg: ExperimentConfig, k: int, gen_alpha: float | None = None) -> BayesianNetwork:
    ga = cfg.gen_alpha if gen_alpha is None else gen_alpha
    spec = NetworkSpec(cfg.n_vars, cfg.max_fanin, cfg.max_arity, ga, cfg.seed)
    dag = random_dag(spec, derive_rng(cfg.seed, "network", k, "dag"))
    return random_parameters(dag, ga, derive_rng(cfg.seed, "network", k, "cpt", str(ga)))


@dataclass(frozen=True)
class Cell:
    kind: str
    network: int
    dataset: int
    sample_size: int
    method: str
    alpha: float
    gen_alpha: float


@dataclass
class CellResult:
    cell: Cell
    scores: list[TargetScore] = field(default_factory=list)
    seconds: float = 0.0
    error: str = ""


def _run_cell(args) -> CellResult:
    cfg, cell = args
    t0 = time.perf_counter()
    try:
        bn = network_for(cfg, cell.network, cell.gen_alpha)
        data = ancestral_sample(
            bn, cell.sample_size, derive_rng(cfg.seed, "data", cell.network, cell.dataset, cell.sample_size, str(cell.gen_alpha))
        )
        search_seed = int(derive_rng(cfg.seed, "search", cell.network, cell.dataset, cell.sample_size).integers(2**31))
        sc = SearchConfig(
            model=cell.method,
            prior=DirichletPrior(cell.alpha),
            mbp_samples=cfg.mbp_samples,
            seed=search_seed,
            significance=cfg.significance,
        )
        mbs = discover_all(data, sc)
        scores = evaluate_blankets(bn, mbs.blankets)
        return CellResult(cell, scores, time.perf_counter() - t0)
    except Exception:  # recorded per cell; the grid keeps going
        return CellResult(cell, [], time.perf_counter() - t0, traceback.format_exc(limit=3))


def experiment_cells(cfg: ExperimentConfig) -> list[Cell]:
    cells = []
    for k in range(cfg.n_networks):
        for d in range(cfg.n_datasets):
            for n in cfg.sample_sizes:
                for m in cfg.methods:
                    cells.append(Cell("main", k, d, n, m, cfg.alpha, cfg.gen_alpha))
                for a in cfg.alpha_sweep:
                    cells.append(Cell("alpha_sweep", k, d, n, "cpt", a, cfg.gen_alpha))
                for ga in cfg.gen_alpha_sweep:
                    cells.append(Cell("prior_true", k, d, n, "cpt", ga, ga))
                    cells.append(Cell("prior_uniform", k, d, n, "cpt", 1.0, ga))
    return cells


def run_experiment(cfg: ExperimentConfig, outdir: str | Path, jobs: int = 1) -> dict[str, Path]:
    """Run the grid and write CSV reports into ``outdir``.

    Files: ``report.csv`` (mean and CI per method and sample size),
    ``mb_size.csv`` (the same split by true blanket size),
    ``alpha_sweep.csv`` / ``prior_sensitivity.csv`` when those sweeps are
    configured, ``failures.csv`` and ``timings.csv`` (wall-clock, not
    reproducible). Everything except timings is byte-deterministic.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    cells = experiment_cells(cfg)
    args = [(cfg, c) for c in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, args))
    else:
        results = [_run_cell(a) for a in args]

    groups: dict[tuple, list[TargetScore]] = defaultdict(list)
    by_size: dict[tuple, list[TargetScore]] = defaultdict(list)
    sweep: dict[tuple, list[TargetScore]] = defaultdict(list)
    prior: dict[tuple, list[TargetScore]] = defaultdict(list)
    failures, timings = [], []
    for res in results:
        c = res.cell
        timings.append([c.kind, c.method, c.network, c.dataset, c.sample_size, c.alpha, c.gen_alpha, f"{res.seconds:.3f}"])
        if res.error:
            failures.append([c.kind, c.method, c.network, c.dataset, c.sample_size, c.alpha, res.error.strip().splitlines()[-1]])
            log.warning("cell %s failed: %s", c, res.error)
            continue
        if c.kind == "main":
            groups[(c.method, c.sample_size)].extend(res.scores)
            for s in res.scores:
                by_size[(c.method, c.sample_size, s.true_size)].append(s)
        elif c.kind == "alpha_sweep":
            sweep[(c.sample_size, c.alpha)].extend(res.scores)
        else:
            prior[(c.gen_alpha, c.kind.split("_")[1], c.sample_size)].extend(res.scores)

    method_rank = {m: i for i, m in enumerate(cfg.methods)}
    rows = []
    for (m, n) in sorted(groups, key=lambda k: (method_rank[k[0]], k[1])):
        rows += report_rows(m, cfg.n_vars, cfg.max_fanin, n, groups[(m, n)])
    paths = {"report": out / "report.csv"}
    write_csv(paths["report"], REPORT_COLUMNS, rows)

    rows = []
    for (m, n, size) in sorted(by_size, key=lambda k: (method_rank[k[0]], k[1], k[2])):
        rows += [r + [size] for r in report_rows(m, cfg.n_vars, cfg.max_fanin, n, by_size[(m, n, size)])]
    paths["mb_size"] = out / "mb_size.csv"
    write_csv(paths["mb_size"], REPORT_COLUMNS + ["mb_size_bucket"], rows)

    extra_metrics = ("learned_size",)
    if sweep:
        rows = []
        for (n, a) in sorted(sweep):
            sc = sweep[(n, a)]
            base = report_rows("cpt", cfg.n_vars, cfg.max_fanin, n, sc)
            for m in extra_metrics:
                s = mean_ci([getattr(x, m) for x in sc]) if len(sc) >= 2 else Summary(float("nan"), float("nan"), len(sc))
                base.append(["cpt", cfg.n_vars, cfg.max_fanin, n, m, _fmt(s.mean), _fmt(s.ci_half_width), s.n])
            rows += [r + [a] for r in base]
        paths["alpha_sweep"] = out / "alpha_sweep.csv"
        write_csv(paths["alpha_sweep"], REPORT_COLUMNS + ["scoring_alpha"], rows)
    if prior:
        rows = []
        for (ga, which, n) in sorted(prior):
            rows += [r + [ga, which] for r in report_rows("cpt", cfg.n_vars, cfg.max_fanin, n, prior[(ga, which, n)])]
        paths["prior_sensitivity"] = out / "prior_sensitivity.csv"
        write_csv(paths["prior_sensitivity"], REPORT_COLUMNS + ["gen_alpha", "prior"], rows)

    paths["failures"] = out / "failures.csv"
    write_csv(paths["failures"], ["kind", "method", "network", "dataset", "sample_size", "alpha", "error"], failures)
    paths["timings"] = out / "timings.csv"
    write_csv(paths["timings"], ["kind", "method", "network", "dataset", "sample_size", "alpha", "gen_alpha", "seconds"], timings)
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n", encoding="utf-8")
    return paths


def read_report(path: str | Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
