"""Running repair strategies over the corpus and adjudicating their patches."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from ..patchmodel import FingerprintMismatch, apply_patch
from ..repair import S1Config, S2Config, prepare_suite, s1_repair, s2_repair
from ..repair.result import RepairResult
from ..testkit import differential_check, run_suite
from .corpus import BugEntry, bug_dirs, load_bug

STRATEGIES = ("s1", "s2", "auto")


@dataclass
class RunOptions:
    """Knobs shared by the CLI and the benchmark."""

    seed: int = 0
    time_budget: Optional[float] = 60.0
    line_assumption: bool = False
    purify: Optional[bool] = None  # None: the strategy's default
    augment: Optional[bool] = None
    regression_budget: int = 1
    top_k: int = 10
    k: int = 3
    depth_bound: int = 2
    L: int = 8
    fuel: int = 20_000


def run_strategy(bug: BugEntry, strategy: str, opts: Optional[RunOptions] = None) -> RepairResult:
    """Repair ``bug``. Strategy 1 purifies and augments by default; ``auto``
    tries Strategy 1 and falls back to Strategy 2."""
    opts = opts or RunOptions()
    if strategy == "s1":
        cfg = S1Config(
            top_k=opts.top_k, regression_budget=opts.regression_budget, time_budget=opts.time_budget,
            fuel=opts.fuel, seed=opts.seed, line_assumption=opts.line_assumption,
            purify=True if opts.purify is None else opts.purify,
            augment=True if opts.augment is None else opts.augment,
        )
        return s1_repair(bug, cfg)
    if strategy == "s2":
        cfg = S2Config(
            top_k=opts.top_k, k=opts.k, depth_bound=opts.depth_bound, L=opts.L,
            time_budget=opts.time_budget, fuel=opts.fuel, seed=opts.seed,
            line_assumption=opts.line_assumption,
            purify=bool(opts.purify), augment=bool(opts.augment),
        )
        return s2_repair(bug, cfg)
    if strategy == "auto":
        # never looks at the bug's label: the class is unknown before repair
        first = run_strategy(bug, "s1", opts)
        if first.success:
            return first
        second = run_strategy(bug, "s2", opts)
        second.wall_time += first.wall_time
        return second
    raise ValueError(f"unknown strategy {strategy!r}")


def full_suite(bug: BugEntry, seed: int = 0) -> list:
    return prepare_suite(bug, True, True, seed)


def check_result(bug: BugEntry, result: RepairResult, trials: int = 1000, seed: int = 0) -> tuple[bool, bool]:
    """(plausible, correct): the patched program passes the purified and
    augmented suite; and it also matches the fixed program on random inputs."""
    try:
        patched = apply_patch(bug.buggy, result.patch)
    except FingerprintMismatch:
        return False, False
    plausible = run_suite(patched, full_suite(bug, seed), traces=False).all_pass
    if not plausible:
        return False, False
    return True, bool(differential_check(patched, bug.fixed, bug.domains, trials, seed))


@dataclass(frozen=True)
class BenchRow:
    bug: str
    expected_class: str
    strategy: str
    status: str
    wall_time: float = field(compare=False)
    plausible: bool
    correct: bool
    iterations: int
    chunks: int

    def __post_init__(self):
        if self.correct and not self.plausible:
            raise ValueError("a correct patch must be plausible")

    def to_json(self, timing: bool = False) -> dict:
        out = {
            "bug": self.bug,
            "expected_class": self.expected_class,
            "strategy": self.strategy,
            "status": self.status,
            "plausible": self.plausible,
            "correct": self.correct,
            "iterations": self.iterations,
            "chunks": self.chunks,
        }
        if timing:
            out["wall_time"] = round(self.wall_time, 3)
        return out


@dataclass
class BenchConfig:
    strategies: Sequence[str] = ("s1", "s2")
    trials: int = 1000
    timing: bool = False  # wall time makes tables differ between runs
    options: RunOptions = field(default_factory=RunOptions)


def bench_bug(bug: BugEntry, config: BenchConfig) -> list[BenchRow]:
    rows = []
    for strategy in config.strategies:
        result = run_strategy(bug, strategy, config.options)
        plausible, correct = check_result(bug, result, config.trials, config.options.seed)
        rows.append(BenchRow(
            bug.id, bug.expected_class.value, strategy, result.status, result.wall_time,
            plausible, correct, len(result.iterations), len(result.patch.chunks),
        ))
    return rows


def bench(corpus_dir: Union[str, Path], config: Optional[BenchConfig] = None) -> list[BenchRow]:
    config = config or BenchConfig()
    rows = []
    for d in bug_dirs(corpus_dir):
        rows.extend(bench_bug(load_bug(d), config))
    rows.sort(key=lambda r: (r.bug, r.strategy))
    return rows


def table_json(rows: Sequence[BenchRow], timing: bool = False) -> str:
    return json.dumps({"rows": [r.to_json(timing) for r in rows]}, indent=2, sort_keys=True) + "\n"


def format_table(rows: Sequence[BenchRow]) -> str:
    head = f"{'bug':<14}{'class':<16}{'strategy':<10}{'status':<17}{'plausible':<11}{'correct':<9}{'time':>8}"
    lines = [head]
    for r in rows:
        lines.append(
            f"{r.bug:<14}{r.expected_class:<16}{r.strategy:<10}{r.status:<17}"
            f"{str(r.plausible):<11}{str(r.correct):<9}{r.wall_time:>7.2f}s"
        )
    return "\n".join(lines)

