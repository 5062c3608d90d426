"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 bad input data or file format,
3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .core import DataError, StructureError, markov_blanket_of
from .evaluation import REPORT_COLUMNS, ExperimentConfig, evaluate_blankets, report_rows, run_experiment, write_csv
from .formats import load_blankets, load_dataset, load_network, save_dataset, save_network
from .polytree import count_mbp
from .scoring import DirichletPrior
from .search import DEFAULT_SYMMETRY, MarkovBlanketSet, SearchConfig, discover_all, discover_mb
from .streams import derive_rng
from .synth import NetworkSpec, ancestral_sample, generate_network

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mbmml", description="Markov blanket discovery with MML scores.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-net", help="generate a random Bayesian network")
    g.add_argument("--vars", type=int, required=True)
    g.add_argument("--max-fanin", type=int, required=True)
    g.add_argument("--max-arity", type=int, required=True)
    g.add_argument("--gen-alpha", type=float, default=1.0)
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output", required=True)

    s = sub.add_parser("sample", help="forward-sample a dataset from a network")
    s.add_argument("--net", required=True)
    s.add_argument("-n", type=int, required=True, dest="n_records")
    s.add_argument("--seed", type=int)
    s.add_argument("-o", "--output", required=True)

    d = sub.add_parser("discover", help="learn Markov blankets from a dataset")
    d.add_argument("--data", required=True)
    d.add_argument("--net", help="network JSON supplying declared arities")
    d.add_argument("--method", choices=["cpt", "nb", "mbp", "iamb"], default="cpt")
    who = d.add_mutually_exclusive_group()
    who.add_argument("--target")
    who.add_argument("--all", action="store_true")
    d.add_argument("--alpha", type=float, default=1.0)
    d.add_argument("--symmetry", choices=["union", "intersection", "none"])
    d.add_argument("--mbp-samples", type=int, default=100)
    d.add_argument("--ensemble", choices=["mixture", "mean"], default="mixture")
    d.add_argument("--significance", type=float, default=0.01)
    d.add_argument("--jobs", type=int, default=1)
    d.add_argument("--seed", type=int)
    d.add_argument("-o", "--output", required=True)

    c = sub.add_parser("count-mbp", help="number of labelled blanket polytrees")
    c.add_argument("--mb-size", type=int, required=True)

    e = sub.add_parser("eval", help="score learned blankets against a network")
    e.add_argument("--truth", required=True)
    e.add_argument("--learned", required=True)
    e.add_argument("--format", choices=["csv", "json"], default="csv")
    e.add_argument("-o", "--output", required=True)

    x = sub.add_parser("experiment", help="run a benchmark grid")
    x.add_argument("--config", required=True)
    x.add_argument("--jobs", type=int, default=1)
    x.add_argument("-o", "--output", required=True)
    return p


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError(f"{args.command}: --seed is required")
    return args.seed


def _header(args) -> None:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "verbose"}
    digest = hashlib.sha256(json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()[:16]
    print(
        json.dumps({"version": __version__, "command": args.command, "seed": getattr(args, "seed", None), "config_digest": digest}),
        file=sys.stderr,
    )


def cmd_gen_net(args) -> int:
    seed = _require_seed(args)
    spec = NetworkSpec(args.vars, args.max_fanin, args.max_arity, args.gen_alpha, seed)
    save_network(generate_network(spec), args.output)
    return EXIT_OK


def cmd_sample(args) -> int:
    seed = _require_seed(args)
    if args.n_records < 1:
        raise UsageError("sample: -n must be >= 1")
    bn = load_network(args.net)
    save_dataset(ancestral_sample(bn, args.n_records, derive_rng(seed, "sample")), args.output)
    return EXIT_OK


def cmd_discover(args) -> int:
    seed = _require_seed(args)
    arities = None
    if args.net:
        bn = load_network(args.net)
        arities = {v.name: v.arity for v in bn.variables}
    data = load_dataset(args.data, arities)
    if data.n_records == 0:
        raise DataError(f"{args.data}: no records")
    config = SearchConfig(
        model=args.method,
        prior=DirichletPrior(args.alpha),
        mbp_samples=args.mbp_samples,
        symmetry=args.symmetry,
        seed=seed,
        ensemble=args.ensemble,
        significance=args.significance,
    )
    if args.target is not None:
        try:
            t = data.index(args.target)
        except KeyError:
            raise UsageError(f"discover: unknown target {args.target!r}") from None
        mb = discover_mb(data, t, config)
        mbs = MarkovBlanketSet(
            {t: mb.members}, tuple(data.names), args.method, seed, config.prior, "none", data.digest(), data.n_records
        )
    else:
        mbs = discover_all(data, config, jobs=args.jobs)
    Path(args.output).write_text(json.dumps(mbs.to_dict(), indent=2) + "\n", encoding="utf-8", newline="\n")
    return EXIT_OK


def cmd_count(args) -> int:
    if args.mb_size < 0:
        raise UsageError("count-mbp: --mb-size must be >= 0")
    print(count_mbp(args.mb_size))
    return EXIT_OK


def cmd_eval(args) -> int:
    bn = load_network(args.truth)
    learned = load_blankets(args.learned)
    names = bn.dag.names
    index = {n: i for i, n in enumerate(names)}
    blankets = {}
    for tname, members in learned["blankets"].items():
        if tname not in index or any(m not in index for m in members):
            raise DataError(f"{args.learned}: blanket of {tname!r} names a variable missing from {args.truth}")
        blankets[index[tname]] = [index[m] for m in members]
    scores = evaluate_blankets(bn, blankets)
    max_fanin = max((len(bn.dag.parents(i)) for i in range(bn.dag.n_vars)), default=0)
    rows = report_rows(learned.get("method", ""), bn.dag.n_vars, max_fanin, learned.get("n_records", 0), scores)
    if args.format == "json":
        obj = {
            "summary": [dict(zip(REPORT_COLUMNS, r)) for r in rows],
            "targets": [
                {
                    "target": names[s.target],
                    "true": sorted(names[m] for m in markov_blanket_of(bn.dag, s.target).members),
                    "learned": sorted(names[m] for m in blankets[s.target]),
                    "tp": s.tp, "fp": s.fp, "fn": s.fn,
                    "precision": s.precision, "recall": s.recall, "edit_distance": s.edit_distance,
                }
                for s in scores
            ],
        }
        Path(args.output).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8", newline="\n")
    else:
        write_csv(args.output, REPORT_COLUMNS, rows)
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{args.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        cfg = ExperimentConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{args.config}: {exc}") from exc
    run_experiment(cfg, args.output, jobs=args.jobs)
    return EXIT_OK


COMMANDS = {
    "gen-net": cmd_gen_net,
    "sample": cmd_sample,
    "discover": cmd_discover,
    "count-mbp": cmd_count,
    "eval": cmd_eval,
    "experiment": cmd_experiment,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    _header(args)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mbmml: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, StructureError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"mbmml: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (AssertionError, ArithmeticError) as exc:
        print(f"mbmml: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
