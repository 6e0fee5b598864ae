"""Shared repair vocabulary: statuses, results and suite preparation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..minilang.ast import Program
from ..patchmodel import Patch, ast_diff
from ..testkit import TestCase, augment, purify

SUCCESS = "Success"
TIMEOUT = "Timeout"
EXHAUSTED = "ExhaustedSearch"
NO_ANGELIC = "NoAngelicValue"
NO_SYNTHESIS = "NoSynthesis"
STATUSES = (SUCCESS, TIMEOUT, EXHAUSTED, NO_ANGELIC, NO_SYNTHESIS)


@dataclass(frozen=True)
class FitnessState:
    residual: int  # originally failing tests still failing
    regressions: int  # originally passing tests now failing

    def key(self) -> tuple:
        return (self.residual, self.regressions)

    def to_json(self) -> dict:
        return {"residual": self.residual, "regressions": self.regressions}


@dataclass(frozen=True)
class Iteration:
    operator: str
    before: FitnessState
    after: FitnessState

    def to_json(self) -> dict:
        return {"operator": self.operator, "before": self.before.to_json(), "after": self.after.to_json()}


@dataclass
class RepairResult:
    status: str
    patch: Patch
    program: Program  # buggy program with the patch applied
    strategy: str = ""
    iterations: list = field(default_factory=list)
    wall_time: float = 0.0
    tests_executed: int = 0
    suite: list = field(default_factory=list, repr=False)
    witness: Optional[object] = None

    @property
    def success(self) -> bool:
        return self.status == SUCCESS

    def to_json(self, timing: bool = True) -> dict:
        out = {
            "strategy": self.strategy,
            "status": self.status,
            "chunks": len(self.patch.chunks),
            "iterations": [it.to_json() for it in self.iterations],
            "tests_executed": self.tests_executed,
        }
        if timing:
            out["wall_time"] = round(self.wall_time, 3)
        return out


class Clock:
    """Wall-clock budget."""

    def __init__(self, budget: Optional[float]):
        self.start = time.monotonic()
        self.budget = budget

    def elapsed(self) -> float:
        return time.monotonic() - self.start

    def expired(self) -> bool:
        return self.budget is not None and self.elapsed() > self.budget


def prepare_suite(
    bug,
    do_purify: bool = False,
    do_augment: bool = False,
    seed: int = 0,
    budget: int = 500,
    max_new: int = 8,
) -> list[TestCase]:
    """The bug's suite, optionally purified, then extended with oracle tests."""
    suite = list(bug.suite)
    if do_purify:
        suite = purify(suite)
    if do_augment:
        suite += augment(bug.buggy, bug.fixed, bug.domains, budget, max_new, seed, existing=suite)
    return suite


def make_result(status: str, buggy: Program, working: Program, strategy: str, clock: Clock, **kw) -> RepairResult:
    return RepairResult(status, ast_diff(buggy, working), working, strategy, wall_time=clock.elapsed(), **kw)
