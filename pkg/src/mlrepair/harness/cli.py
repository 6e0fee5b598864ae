"""Command line entry point: ``mlrepair``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..faultloc import NoChain, compute_epc, localize
from ..patchmodel import classify
from ..testkit import run_suite
from .bench import BenchConfig, RunOptions, bench, format_table, run_strategy, table_json
from .corpus import CorpusError, format_stats, load_bug, stats

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _cmd_run_tests(args) -> int:
    bug = load_bug(args.bug, check=False)
    report = run_suite(bug.buggy if not args.fixed else bug.fixed, bug.suite, traces=False)
    for r in report.results:
        extra = f" (assertion {r.failed_index})" if not r.passed else ""
        print(f"{r.status:<5} {r.name}{extra}")
    print(f"{report.passing} passing, {report.failing} failing")
    return EXIT_OK


def _cmd_localize(args) -> int:
    bug = load_bug(args.bug, check=False)
    faulty = bug.faulty_lines if args.line_assumption else None
    ranking = localize(bug.buggy, bug.suite, faulty_lines=faulty)
    for i, e in enumerate(ranking[: args.top_k]):
        print(f"{i + 1:>3}  {e.node.fn}:{e.line:<4} {e.score:.4f}")
    return EXIT_OK


def _cmd_epc(args) -> int:
    bug = load_bug(args.bug, check=False)
    seed = bug.buggy.stmt_at(args.fn, args.line)
    if seed is None:
        print(f"no statement at {args.fn}:{args.line}", file=sys.stderr)
        return EXIT_USAGE
    report = run_suite(bug.buggy, bug.suite)
    try:
        r = report.result(args.test)
    except KeyError:
        print(f"no test named {args.test}", file=sys.stderr)
        return EXIT_USAGE
    if r.passed:
        print(f"test {args.test} passes; chains start from failing runs", file=sys.stderr)
        return EXIT_USAGE
    try:
        epc = compute_epc(bug.buggy, r.trace, seed.nid, args.test)
    except (NoChain, ValueError) as e:
        print(f"no chain: {e}")
        return EXIT_FAILED
    print(json.dumps(epc.to_json(bug.buggy), indent=2))
    return EXIT_OK


def _cmd_classify(args) -> int:
    bug = load_bug(args.bug, check=False)
    print(classify(bug.ground_truth(), bug.buggy).value)
    return EXIT_OK


def _cmd_repair(args) -> int:
    bug = load_bug(args.bug)
    opts = RunOptions(
        seed=args.seed,
        time_budget=args.time_budget,
        line_assumption=args.line_assumption,
        purify=args.purify,
        augment=args.augment,
        regression_budget=args.regression_budget,
        top_k=args.top_k,
        k=args.k,
        depth_bound=args.depth_bound,
        L=args.L,
    )
    result = run_strategy(bug, args.strategy, opts)
    print(f"status: {result.status}")
    print(f"chunks: {len(result.patch.chunks)}")
    for c in result.patch.chunks:
        print(f"  {c.action} {c.fn}:{c.line_span[0]}")
        for line in c.fragment_src(c.added).splitlines():
            print(f"    + {line}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "result.json").write_text(json.dumps(result.to_json(), indent=2) + "\n")
        (out / "patch.json").write_text(json.dumps(result.patch.to_json(), indent=2) + "\n")
        if result.witness is not None:
            (out / "witness.json").write_text(json.dumps(result.witness.to_json(), indent=2) + "\n")
    return EXIT_OK if result.success else EXIT_FAILED


def _cmd_stats(args) -> int:
    print(format_stats(stats(args.corpus)))
    return EXIT_OK


def _cmd_bench(args) -> int:
    opts = RunOptions(seed=args.seed, time_budget=args.time_budget, line_assumption=args.line_assumption)
    strategies = ("s1", "s2") if args.strategy == "both" else (args.strategy,)
    config = BenchConfig(strategies=strategies, trials=args.trials, timing=args.timing, options=opts)
    rows = bench(args.corpus, config)
    text = table_json(rows, config.timing)
    if args.out:
        Path(args.out).write_text(text)
        print(format_table(rows))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mlrepair", description="Multi-location repair workbench for MiniLang.")
    p.add_argument("-v", "--verbose", action="store_true", help="log search progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("run-tests", help="run a bug's test suite")
    s.add_argument("bug")
    s.add_argument("--fixed", action="store_true", help="run against fixed.ml instead")
    s.set_defaults(func=_cmd_run_tests)

    s = sub.add_parser("localize", help="rank suspicious statements")
    s.add_argument("bug")
    s.add_argument("--top-k", type=int, default=10)
    s.add_argument("--line-assumption", action="store_true")
    s.set_defaults(func=_cmd_localize)

    s = sub.add_parser("epc", help="error propagation chain of one statement")
    s.add_argument("bug")
    s.add_argument("--fn", required=True)
    s.add_argument("--line", type=int, required=True)
    s.add_argument("--test", required=True)
    s.set_defaults(func=_cmd_epc)

    s = sub.add_parser("classify", help="classify the ground-truth patch")
    s.add_argument("bug")
    s.set_defaults(func=_cmd_classify)

    s = sub.add_parser("repair", help="repair one bug")
    s.add_argument("bug")
    s.add_argument("--strategy", choices=("s1", "s2", "auto"), default="auto")
    s.add_argument("--purify", action="store_true")
    s.add_argument("--augment", action="store_true")
    s.add_argument("--line-assumption", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--time-budget", type=float, default=60.0)
    s.add_argument("--regression-budget", type=int, default=1)
    s.add_argument("--top-k", type=int, default=10)
    s.add_argument("--k", type=int, default=3, help="statements whose chains are intersected")
    s.add_argument("--depth-bound", type=int, default=2)
    s.add_argument("--L", type=int, default=8, help="occurrence bound for angelic search")
    s.add_argument("--out", help="directory for result.json, patch.json, witness.json")
    s.set_defaults(func=_cmd_repair)

    s = sub.add_parser("stats", help="patch class counts over a corpus")
    s.add_argument("corpus")
    s.set_defaults(func=_cmd_stats)

    s = sub.add_parser("bench", help="run both strategies over a corpus")
    s.add_argument("corpus")
    s.add_argument("--out")
    s.add_argument("--strategy", choices=("s1", "s2", "auto", "both"), default="both")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--time-budget", type=float, default=60.0)
    s.add_argument("--line-assumption", action="store_true")
    s.add_argument("--timing", action="store_true", help="include wall time in the table")
    s.set_defaults(func=_cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CorpusError as e:
        print(f"corpus error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
