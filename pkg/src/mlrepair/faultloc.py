"""Spectrum-based fault localization and error propagation chains."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .minilang.ast import NodeId, Program
from .minilang.interp import DEFAULT_FUEL, ExecTrace
from .testkit import SuiteReport, TestCase, run_suite

DEFAULT_K = 100


@dataclass(frozen=True)
class Counts:
    ef: int
    ep: int
    nf: int
    np: int


@dataclass(frozen=True)
class Spectrum:
    counts: dict  # NodeId -> Counts, statements only
    failing: int
    passing: int
    lines: dict = field(default_factory=dict, compare=False)  # NodeId -> line

    def __getitem__(self, nid: NodeId) -> Counts:
        return self.counts[nid]


@dataclass(frozen=True)
class RankEntry:
    node: NodeId
    line: int
    score: float

    @property
    def fn(self) -> str:
        return self.node.fn


def _rank_key(e: RankEntry):
    return (-e.score, e.line, e.node.fn)


class Ranking(tuple):
    """Entries in descending score; ties by ascending line, then function."""

    def __new__(cls, entries: Iterable[RankEntry] = ()):
        return super().__new__(cls, sorted(entries, key=_rank_key))

    def nodes(self) -> list[NodeId]:
        return [e.node for e in self]

    def position(self, nid: NodeId) -> Optional[int]:
        for i, e in enumerate(self):
            if e.node == nid:
                return i
        return None

    def to_json(self) -> list:
        return [{"fn": e.node.fn, "line": e.line, "node": str(e.node), "score": e.score} for e in self]


class _Ordered(Ranking):
    """A ranking whose order is given rather than sorted."""

    def __new__(cls, entries: Iterable[RankEntry] = ()):
        return tuple.__new__(cls, list(entries))


def statement_lines(program: Program) -> dict:
    return {s.nid: s.line for s in program.statements()}


def collect_spectrum(
    program: Program,
    suite: Sequence[TestCase],
    fuel: int = DEFAULT_FUEL,
    report: Optional[SuiteReport] = None,
) -> Spectrum:
    """Coverage counts per statement. A test covers a statement when any of
    its executed assertions ran it."""
    if report is None:
        report = run_suite(program, suite, fuel, traces=False)
    lines = statement_lines(program)
    F = report.failing
    P = report.passing
    ef = dict.fromkeys(lines, 0)
    ep = dict.fromkeys(lines, 0)
    for r in report.results:
        bucket = ep if r.passed else ef
        for nid in r.coverage:
            if nid in bucket:
                bucket[nid] += 1
    counts = {nid: Counts(ef[nid], ep[nid], F - ef[nid], P - ep[nid]) for nid in lines}
    return Spectrum(counts, F, P, lines)


def ochiai_score(ef: int, ep: int, F: int) -> float:
    """ef / sqrt(F * (ef + ep)), or 0 when the denominator vanishes."""
    denom = F * (ef + ep)
    if denom == 0:
        return 0.0
    return ef / math.sqrt(denom)


def rank(spectrum: Spectrum) -> Ranking:
    """Rank every executed statement by Ochiai suspiciousness."""
    if spectrum.failing < 1:
        raise ValueError("ranking needs at least one failing test")
    entries = []
    for nid, c in spectrum.counts.items():
        if c.ef + c.ep == 0:
            continue
        entries.append(RankEntry(nid, spectrum.lines[nid], ochiai_score(c.ef, c.ep, spectrum.failing)))
    return Ranking(entries)


# -- error propagation chains ---------------------------------------------------


@dataclass(frozen=True)
class EPC:
    seed: NodeId
    run: str
    chain: tuple  # node ids, seed first, failure node last
    steps: tuple = field(default=(), compare=False)  # event path behind the chain

    def to_json(self, program: Optional[Program] = None) -> dict:
        lines = statement_lines(program) if program is not None else {}
        return {
            "seed": str(self.seed),
            "test": self.run,
            "chain": [{"fn": n.fn, "line": lines.get(n, 0), "node": str(n)} for n in self.chain],
        }


class NoChain(Exception):
    """The seed has no dependence path to the failure."""


def dependence_successors(trace: ExecTrace) -> list[list[int]]:
    """Forward edges of the dynamic dependence graph of ``trace``."""
    succ: list[list[int]] = [[] for _ in trace.events]
    for e in trace.events:
        for d in e.deps:
            succ[d].append(e.step)
        if e.ctrl is not None:
            succ[e.ctrl].append(e.step)
    for s in succ:
        s.sort()
    return succ


def compute_epc(program: Program, trace: ExecTrace, seed: NodeId, run: str = "") -> EPC:
    """Longest dependence path from the last instance of ``seed`` to the
    failure event (the trace's final event).

    Dependences always point forward in the trace, so the graph is a DAG and
    the longest path is found by one sweep in step order.
    """
    events = trace.events
    if not events:
        raise NoChain("empty trace")
    start = trace.last_instance(seed)
    if start is None:
        raise ValueError(f"seed {seed} was not executed")
    target = len(events) - 1
    succ = dependence_successors(trace)
    best = {start: 1}
    pred: dict[int, int] = {}
    for i in range(start, target + 1):
        if i not in best:
            continue
        for j in succ[i]:
            cand = best[i] + 1
            # strict > keeps the earliest predecessor on ties
            if j not in best or cand > best[j]:
                best[j] = cand
                pred[j] = i
    if target not in best:
        raise NoChain(f"{seed} does not reach the failure")
    path = [target]
    while path[-1] != start:
        path.append(pred[path[-1]])
    path.reverse()
    chain: list[NodeId] = []
    for step in path:
        nid = events[step].node_id
        if nid not in chain:
            chain.append(nid)
    return EPC(seed, run, tuple(chain), tuple(path))


def epc_intersections(chains: Sequence[EPC]) -> set:
    """Node ids common to every chain."""
    if len(chains) < 2:
        raise ValueError("need at least two chains")
    common = set(chains[0].chain)
    for c in chains[1:]:
        common &= set(c.chain)
    return common


def failing_traces(report: SuiteReport) -> list[tuple[str, ExecTrace]]:
    return [(r.name, r.trace) for r in report.results if not r.passed and r.trace is not None]


def chains_for(program: Program, report: SuiteReport, seeds: Sequence[NodeId]) -> list[EPC]:
    """EPCs of each seed in each failing run that executed it."""
    out = []
    for name, trace in failing_traces(report):
        executed = trace.coverage()
        for seed in seeds:
            if seed not in executed:
                continue
            try:
                out.append(compute_epc(program, trace, seed, name))
            except NoChain:
                pass
    return out


def merge_intersections_into_ranking(ranking: Ranking, k: int, chains: Sequence[EPC], program: Optional[Program] = None) -> Ranking:
    """Add pairwise EPC intersections of the top-k statements to the ranking.

    Intersection nodes already among the top k are left alone. Others enter
    (or move up) with the highest score among the statements whose chains
    produced them.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    head = list(ranking[:k])
    head_nodes = {e.node: e for e in head}
    by_run: dict[str, list[EPC]] = {}
    for c in chains:
        if c.seed in head_nodes:
            by_run.setdefault(c.run, []).append(c)
    contributed: dict[NodeId, float] = {}
    for run_chains in by_run.values():
        for a, b in combinations(run_chains, 2):
            if a.seed == b.seed:
                continue
            score = max(head_nodes[a.seed].score, head_nodes[b.seed].score)
            for nid in epc_intersections([a, b]):
                if nid in head_nodes:
                    continue
                contributed[nid] = max(score, contributed.get(nid, 0.0))
    if not contributed:
        return ranking
    lines = statement_lines(program) if program is not None else {}
    entries = {e.node: e for e in ranking}
    moved = []
    for nid, score in sorted(contributed.items(), key=lambda kv: (-kv[1], str(kv[0]))):
        old = entries.get(nid)
        line = old.line if old is not None else lines.get(nid, 0)
        if old is None or old.score < score:
            moved.append(RankEntry(nid, line, score))
    if not moved:
        return ranking
    if not isinstance(ranking, _Ordered):
        for e in moved:
            entries[e.node] = e
        return Ranking(entries.values())
    # keep a hand-ordered ranking's order; new entries go after equal scores
    moved_nodes = {e.node for e in moved}
    out = [e for e in ranking if e.node not in moved_nodes]
    for e in sorted(moved, key=_rank_key):
        pos = next((i for i, x in enumerate(out) if x.score < e.score), len(out))
        out.insert(pos, e)
    return _Ordered(out)


def line_assumption(ranking: Ranking, faulty_lines: Sequence[tuple], program: Optional[Program] = None) -> Ranking:
    """Promote the statements at known faulty (function, line) pairs to the
    head of the ranking with score 1.0, in source order.

    Faulty statements that were never executed are looked up in ``program``
    and prepended as well.
    """
    if not faulty_lines:
        return ranking
    wanted = sorted({(fn, line) for fn, line in faulty_lines}, key=lambda x: (x[1], x[0]))
    by_loc = {(e.node.fn, e.line): e for e in ranking}
    head = []
    for fn, line in wanted:
        e = by_loc.get((fn, line))
        if e is not None:
            head.append(RankEntry(e.node, e.line, 1.0))
            continue
        stmt = program.stmt_at(fn, line) if program is not None else None
        if stmt is None:
            raise ValueError(f"no statement at {fn}:{line}")
        head.append(RankEntry(stmt.nid, line, 1.0))
    promoted = {e.node for e in head}
    rest = [e for e in ranking if e.node not in promoted]
    return _Ordered(head + rest)


def localize(
    program: Program,
    suite: Sequence[TestCase],
    fuel: int = DEFAULT_FUEL,
    faulty_lines: Optional[Sequence[tuple]] = None,
    report: Optional[SuiteReport] = None,
) -> Ranking:
    ranking = rank(collect_spectrum(program, suite, fuel, report))
    if faulty_lines:
        ranking = line_assumption(ranking, faulty_lines, program)
    return ranking
