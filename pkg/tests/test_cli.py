import json
import subprocess
import sys

import pytest

from mbmml.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def test_count(capsys):
    assert run("count-mbp", "--mb-size", 6) == 0
    assert capsys.readouterr().out.strip() == "3100"
    assert run("count-mbp", "--mb-size", -1) == 1


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run("count-mbp", "--bogus")
    assert exc.value.code == 1
    assert run("gen-net", "--vars", 3, "--max-fanin", 1, "--max-arity", 2, "-o", tmp_path / "n.json") == 1


def test_header_on_stderr(capsys):
    run("count-mbp", "--mb-size", 2)
    header = json.loads(capsys.readouterr().err.splitlines()[0])
    assert header["command"] == "count-mbp" and "config_digest" in header


def test_single_variable_discover(tmp_path):
    (tmp_path / "d.csv").write_text("A\n0\n1\n1\n")
    assert run("discover", "--data", tmp_path / "d.csv", "--method", "cpt", "--all", "--seed", 0, "-o", tmp_path / "m.json") == 0
    assert json.loads((tmp_path / "m.json").read_text())["blankets"] == {"A": []}


def test_malformed_inputs_exit_2(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("A,B\n0,1\n1\n")
    assert run("discover", "--data", tmp_path / "bad.csv", "--all", "--seed", 0, "-o", tmp_path / "m.json") == 2
    assert "line 3" in capsys.readouterr().err
    (tmp_path / "bad.json").write_text("{")
    assert run("sample", "--net", tmp_path / "bad.json", "-n", 10, "--seed", 1, "-o", tmp_path / "d.csv") == 2
    assert run("sample", "--net", tmp_path / "missing.json", "-n", 10, "--seed", 1, "-o", tmp_path / "d.csv") == 2


def pipeline(root, seed=5):
    root.mkdir()
    net, data, mbs, rep = (root / f for f in ("net.json", "data.csv", "mbs.json", "report.csv"))
    assert run("gen-net", "--vars", 5, "--max-fanin", 2, "--max-arity", 3, "--seed", seed, "-o", net) == 0
    assert run("sample", "--net", net, "-n", 500, "--seed", seed, "-o", data) == 0
    assert run("discover", "--data", data, "--net", net, "--method", "cpt", "--all", "--seed", seed, "-o", mbs) == 0
    assert run("eval", "--truth", net, "--learned", mbs, "-o", rep) == 0
    return [p.read_bytes() for p in (net, data, mbs, rep)]


def test_pipeline_is_byte_identical(tmp_path):
    a = pipeline(tmp_path / "a")
    b = pipeline(tmp_path / "b")
    assert a == b
    assert a[3].decode().splitlines()[0] == "method,n_vars,max_fanin,sample_size,metric,mean,ci_half_width,n_observations"


def test_discover_single_target_and_eval_json(tmp_path):
    pipeline(tmp_path / "p")
    p = tmp_path / "p"
    assert run("discover", "--data", p / "data.csv", "--method", "mbp", "--target", "X2", "--seed", 1,
               "--mbp-samples", 20, "-o", p / "one.json") == 0
    obj = json.loads((p / "one.json").read_text())
    assert list(obj["blankets"]) == ["X2"] and obj["symmetry"] == "none"
    assert run("discover", "--data", p / "data.csv", "--target", "nope", "--seed", 1, "-o", p / "x.json") == 1
    assert run("eval", "--truth", p / "net.json", "--learned", p / "mbs.json", "--format", "json", "-o", p / "e.json") == 0
    ev = json.loads((p / "e.json").read_text())
    assert len(ev["targets"]) == 5 and {r["metric"] for r in ev["summary"]} == {"edit_distance", "precision", "recall"}


def test_eval_unknown_variable(tmp_path):
    pipeline(tmp_path / "p")
    p = tmp_path / "p"
    (p / "wrong.json").write_text('{"blankets": {"Q": []}}')
    assert run("eval", "--truth", p / "net.json", "--learned", p / "wrong.json", "-o", p / "r.csv") == 2


def test_experiment_command(tmp_path):
    cfg = {"n_vars": 4, "n_networks": 1, "n_datasets": 2, "sample_sizes": [100], "methods": ["cpt", "iamb"]}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert run("experiment", "--config", tmp_path / "c.json", "-o", tmp_path / "out") == 0
    assert (tmp_path / "out" / "report.csv").exists()
    (tmp_path / "c.json").write_text(json.dumps({"unknown": 1}))
    assert run("experiment", "--config", tmp_path / "c.json", "-o", tmp_path / "out2") == 2


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "mbmml.cli", "count-mbp", "--mb-size", "3"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "23"
