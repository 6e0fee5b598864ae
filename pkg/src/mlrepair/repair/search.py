"""Strategy 1: greedy generate-and-validate repair with partial-fix commits."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

from ..faultloc import Ranking, line_assumption, localize
from ..minilang.ast import Program
from ..patchmodel import apply_patch
from ..testkit import TestCase, run_suite, run_test
from .edit import find_by_origin
from .mutations import KINDS, apply_mutation, statement_mutations
from .result import (
    EXHAUSTED,
    SUCCESS,
    TIMEOUT,
    Clock,
    FitnessState,
    Iteration,
    RepairResult,
    make_result,
    prepare_suite,
)

log = logging.getLogger(__name__)


@dataclass
class S1Config:
    top_k: int = 10
    regression_budget: int = 1
    max_iters: int = 10
    time_budget: Optional[float] = 60.0
    fuel: int = 20_000
    seed: int = 0
    purify: bool = False
    augment: bool = False
    line_assumption: bool = False


def evaluate_fitness(
    candidate: Program,
    suite: Sequence[TestCase],
    original_failing: set,
    original_passing: set,
    fuel: int,
) -> FitnessState:
    report = run_suite(candidate, suite, fuel, traces=False)
    failing = set(report.failing_names())
    return FitnessState(len(failing & original_failing), len(failing & original_passing))


def _working_ranking(working: Program, suite, report, faulty_origins, fuel) -> Ranking:
    ranking = localize(working, suite, fuel, report=report)
    if faulty_origins:
        located = []
        for origin in faulty_origins:
            s = find_by_origin(working, origin)
            if s is not None:
                located.append((s.nid.fn, s.line))
        ranking = line_assumption(ranking, located, working)
    return ranking


class _Session:
    def __init__(self, suite, config: S1Config, clock: Clock):
        self.suite = suite
        self.by_name = {t.name: t for t in suite}
        self.config = config
        self.clock = clock
        self.executed = 0

    def run(self, program, name):
        self.executed += 1
        result, _ = run_test(program, self.by_name[name], self.config.fuel, traces=False)
        return result.passed

    def score(self, cand, covering, failing_now, orig_fail, orig_pass, residual, best):
        """Fitness of ``cand`` re-running only the ``covering`` tests (the
        others cannot change), or None once it is provably inadmissible or
        no better than ``best``."""
        failing = set(failing_now) - set(covering)
        # currently failing tests first: they decide admissibility
        order = sorted(covering, key=lambda n: (n not in failing_now, n))
        state = FitnessState(len(failing & orig_fail), len(failing & orig_pass))
        for name in order + [None]:
            if name is not None and not self.run(cand, name):
                failing.add(name)
            # a lower bound until every covering test has run
            state = FitnessState(len(failing & orig_fail), len(failing & orig_pass))
            if state.residual >= residual or state.regressions > self.config.regression_budget:
                return None
            if best is not None and state.key() >= best:
                return None
        return state, failing


def s1_repair(bug, config: Optional[S1Config] = None, suite: Optional[list] = None) -> RepairResult:
    """Commit one admissible edit per iteration until the suite passes.

    An edit is admissible when it strictly lowers the number of originally
    failing tests that still fail, with at most ``regression_budget``
    originally passing tests broken.
    """
    config = config or S1Config()
    clock = Clock(config.time_budget)
    if suite is None:
        suite = prepare_suite(bug, config.purify, config.augment, config.seed)
    buggy: Program = bug.buggy
    report = run_suite(buggy, suite, config.fuel, traces=False)
    session = _Session(suite, config, clock)
    session.executed += len(suite)
    orig_fail = set(report.failing_names())
    orig_pass = set(report.passing_names())
    iterations: list[Iteration] = []
    working = buggy
    state = FitnessState(len(orig_fail), 0)
    faulty = []
    if config.line_assumption:
        for fn, line in bug.faulty_lines:
            s = buggy.stmt_at(fn, line)
            if s is not None:
                faulty.append(s.origin or s.nid)

    def finish(status):
        return make_result(
            status, buggy, working, "s1", clock,
            iterations=iterations, tests_executed=session.executed, suite=suite,
        )

    if not orig_fail:
        return finish(SUCCESS)
    for _ in range(config.max_iters):
        if report.all_pass:
            break
        ranking = _working_ranking(working, suite, report, faulty, config.fuel)
        failing_now = set(report.failing_names())
        coverage = {r.name: r.coverage for r in report.results}
        best = None  # (state, position, kind index, op, program, failing)
        for pos, entry in enumerate(ranking[: config.top_k]):
            covering = [n for n, cov in coverage.items() if entry.node in cov]
            for op in statement_mutations(working, entry.node):
                if clock.expired():
                    return finish(TIMEOUT)
                cand = apply_mutation(working, op)
                if cand is None:
                    continue
                scored = session.score(
                    cand, covering, failing_now, orig_fail, orig_pass,
                    state.residual, None if best is None else best[0].key(),
                )
                if scored is None:
                    continue
                cstate, failing = scored
                if best is None or cstate.key() < best[0].key():
                    best = (cstate, pos, KINDS.index(op.kind), op, cand, failing)
                if cstate.key() == (0, 0):
                    break
            if best is not None and best[0].key() == (0, 0):
                break
        if best is None:
            return finish(EXHAUSTED)
        cstate, _, _, op, cand, _ = best
        iterations.append(Iteration(op.describe(), state, cstate))
        log.info("commit %s: %s -> %s", op.describe(), state.key(), cstate.key())
        working, state = cand, cstate
        report = run_suite(working, suite, config.fuel, traces=False)
        session.executed += len(suite)
    if report.all_pass:
        result = finish(SUCCESS)
        # revalidate the patch applied to the original program from scratch
        final = run_suite(apply_patch(buggy, result.patch), suite, config.fuel, traces=False)
        session.executed += len(suite)
        result.tests_executed = session.executed
        if not final.all_pass:
            result.status = EXHAUSTED
        return result
    return finish(EXHAUSTED)

