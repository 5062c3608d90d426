import csv
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mbmml.evaluation import (
    ExperimentConfig,
    TargetScore,
    aggregate,
    mean_ci,
    read_report,
    run_experiment,
    score_mb,
)

A, B, C = 1, 2, 3


def test_score_examples():
    s = score_mb({A, B}, {B, C}, 0)
    assert (s.tp, s.fp, s.fn, s.precision, s.recall, s.edit_distance) == (1, 1, 1, 0.5, 0.5, 2)
    s = score_mb(set(), set(), 0)
    assert (s.precision, s.recall, s.edit_distance) == (1.0, 1.0, 0)
    s = score_mb({A, B, C}, {A, B, C}, 0)
    assert (s.precision, s.recall, s.edit_distance) == (1.0, 1.0, 0)
    with pytest.raises(ValueError):
        score_mb({0}, set(), 0)


members = st.frozensets(st.integers(1, 8), max_size=8)


@settings(max_examples=200, deadline=None)
@given(members, members)
def test_score_properties(t, l):
    s = score_mb(t, l, 0)
    swapped = score_mb(l, t, 0)
    assert (swapped.fp, swapped.fn) == (s.fn, s.fp)
    assert s.edit_distance == s.fp + s.fn
    assert 0 <= s.precision <= 1 and 0 <= s.recall <= 1
    if t:
        assert (s.edit_distance == 0) == (s.precision == 1 and s.recall == 1)


def _ts(ed):
    return TargetScore(0, 0, ed, 0, 1.0, 1.0, ed)


def test_aggregate_examples():
    agg = aggregate([_ts(0), _ts(2)])
    assert agg["edit_distance"].mean == 1.0
    assert agg["edit_distance"].ci_half_width == pytest.approx(1.96)
    assert aggregate([_ts(3)] * 5)["edit_distance"].ci_half_width == 0.0
    with pytest.raises(ValueError):
        aggregate([_ts(1)])


def test_aggregate_order_invariant():
    rng = random.Random(3)
    vals = [rng.random() * 5 for _ in range(37)]
    a = mean_ci(vals)
    rng.shuffle(vals)
    assert mean_ci(vals) == a
    assert a.ci_half_width == pytest.approx(1.96 * _sd(vals) / math.sqrt(37))


def _sd(v):
    m = sum(v) / len(v)
    return math.sqrt(sum((x - m) ** 2 for x in v) / (len(v) - 1))


def test_config_round_trip_and_validation():
    cfg = ExperimentConfig(n_networks=2, sample_sizes=(100,))
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"bogus": 1})


def test_smallest_grid(tmp_path):
    cfg = ExperimentConfig(n_vars=6, n_networks=1, n_datasets=1, sample_sizes=(100,), methods=("cpt",))
    paths = run_experiment(cfg, tmp_path)
    rows = read_report(paths["report"])
    # one aggregate group, reported in long form with one line per metric
    assert {(r["method"], r["sample_size"]) for r in rows} == {("cpt", "100")}
    assert [r["metric"] for r in rows] == ["edit_distance", "precision", "recall"]
    assert all(int(r["n_observations"]) == 6 for r in rows)
    assert read_report(paths["failures"]) == []
    with open(paths["mb_size"], newline="") as fh:
        assert "mb_size_bucket" in next(csv.reader(fh))


def test_sweeps_and_determinism(tmp_path):
    cfg = ExperimentConfig(
        n_vars=5, n_networks=2, n_datasets=1, sample_sizes=(200,), methods=("cpt", "nb"),
        alpha_sweep=(0.5, 5.0), gen_alpha_sweep=(0.5,),
    )
    a = run_experiment(cfg, tmp_path / "a")
    b = run_experiment(cfg, tmp_path / "b", jobs=2)
    for key in ("report", "mb_size", "alpha_sweep", "prior_sensitivity", "failures"):
        assert a[key].read_bytes() == b[key].read_bytes()
    sweep = read_report(a["alpha_sweep"])
    assert {r["scoring_alpha"] for r in sweep} == {"0.5", "5.0"}
    assert "learned_size" in {r["metric"] for r in sweep}
    prior = read_report(a["prior_sensitivity"])
    assert {r["prior"] for r in prior} == {"true", "uniform"}


def test_failing_cell_is_recorded(tmp_path):
    cfg = ExperimentConfig(n_vars=4, n_networks=1, n_datasets=1, sample_sizes=(50,), methods=("cpt",), mbp_samples=0, alpha=-1.0)
    paths = run_experiment(cfg, tmp_path)
    fails = read_report(paths["failures"])
    assert len(fails) == 1 and fails[0]["method"] == "cpt"
    assert read_report(paths["report"]) == []
