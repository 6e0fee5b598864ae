"""Strategy 2: angelic-value search at ranked condition sites followed by
enumerative synthesis of the guard condition."""

from __future__ import annotations

import dataclasses
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..faultloc import Ranking, chains_for, localize, merge_intersections_into_ranking
from ..minilang.ast import (
    ARRAY,
    BOOL,
    INT,
    REL_OPS,
    UNIT,
    Binary,
    BoolLit,
    If,
    IntLit,
    Len,
    Let,
    NodeId,
    Program,
    Return,
    Unary,
    Var,
    While,
)
from ..minilang.interp import PerOccurrence, Uniform, policy_to_json, run_quiet
from ..minilang.printer import format_expr
from ..patchmodel import apply_patch
from ..testkit import TestCase, run_suite
from .edit import checked, function_constants, rewrite_stmt, scope_at
from .mutations import default_values
from .result import (
    NO_ANGELIC,
    NO_SYNTHESIS,
    SUCCESS,
    TIMEOUT,
    Clock,
    RepairResult,
    make_result,
    prepare_suite,
)

log = logging.getLogger(__name__)

MODIFY = "ModifyCondition"
SKIP = "InsertGuardSkip"
RETURN = "InsertGuardReturn"

_MARK = NodeId("<guard>", -1)


class NoAngelicValue(Exception):
    pass


class NoSynthesis(Exception):
    pass


@dataclass(frozen=True)
class Mode:
    kind: str
    default: Optional[object] = None  # returned value for RETURN

    def __str__(self) -> str:
        if self.kind == RETURN:
            return f"{self.kind}({format_expr(self.default)})"
        return self.kind


@dataclass
class S2Config:
    top_k: int = 10
    k: int = 3  # statements whose chains are intersected
    depth_bound: int = 2
    L: int = 8
    time_budget: Optional[float] = 60.0
    fuel: int = 20_000
    seed: int = 0
    purify: bool = False
    augment: bool = False
    line_assumption: bool = False
    candidate_budget: int = 200_000


# -- locations --------------------------------------------------------------------


def candidate_locations(ranking: Ranking, top_k: int, program: Program) -> list[tuple[NodeId, tuple]]:
    nodes = program.node_index()
    out = []
    for entry in ranking[:top_k]:
        s = nodes[entry.node]
        modes = []
        if isinstance(s, (If, While)):
            modes.append(Mode(MODIFY))
        # a declaration cannot be wrapped without hiding it from later code
        if not isinstance(s, Let):
            modes.append(Mode(SKIP))
        ret = program.function(entry.node.fn).ret
        if ret != UNIT:
            modes.extend(Mode(RETURN, d) for d in default_values(ret))
        out.append((entry.node, tuple(modes)))
    return out


def placeholder_program(program: Program, nid: NodeId, mode: Mode) -> Optional[tuple[Program, NodeId]]:
    """Program carrying the condition under search, and that condition's site.

    Insert modes add a neutral guard: ``if (true) { s }`` for skipping and
    ``if (false) { return d; }`` for early return.
    """
    if mode.kind == MODIFY:
        return program, nid
    if mode.kind == SKIP:
        edited = rewrite_stmt(program, nid, lambda s: (If(BoolLit(True), (s,), origin=_MARK),))
    else:
        edited = rewrite_stmt(program, nid, lambda s: (If(BoolLit(False), (Return(mode.default),), origin=_MARK), s))
    if checked(edited) is None:
        return None
    site = next(s.nid for s in edited.statements() if s.origin == _MARK)
    return edited, site


# -- angelic search -----------------------------------------------------------------


@dataclass
class AngelicWitness:
    location: NodeId
    mode: Mode
    site: NodeId  # condition node in ``program``
    schedule: Optional[object]  # Uniform or PerOccurrence on the failing tests; None when vacuous
    evidence: dict  # test name -> passed under the schedule
    forced_tests: tuple
    program: Program = field(repr=False)

    def schedule_for(self, test_name: str) -> dict:
        if self.schedule is None or test_name not in self.forced_tests:
            return {}
        return {self.site: self.schedule}

    def to_json(self) -> dict:
        return {
            "location": str(self.location),
            "mode": str(self.mode),
            "schedule": None if self.schedule is None else policy_to_json(self.schedule),
            "forced_tests": list(self.forced_tests),
            "outcomes": {k: ("pass" if v else "fail") for k, v in sorted(self.evidence.items())},
        }


def _run(program: Program, test: TestCase, schedule: dict, fuel: int, on_branch=None) -> tuple[bool, int]:
    """Pass/fail of ``test`` under ``schedule`` and the most occurrences any
    assertion made of a scheduled condition."""
    most = 0
    for a in test.assertions:
        term, _, occ = run_quiet(program, a.fn, a.args, fuel, schedule, on_branch)
        most = max([most, *occ.values()])
        if not a.accepts(term):
            return False, most
    return True, most


def angelic_search(
    program: Program,
    suite: Sequence[TestCase],
    location: tuple,
    fuel: int = 20_000,
    L: int = 8,
    clock: Optional[Clock] = None,
) -> AngelicWitness:
    """First condition schedule under which the whole suite passes.

    Only the failing tests are forced; the passing ones run as they are, so
    the witness also records how their behavior must be preserved.
    """
    nid, mode = location
    placed = placeholder_program(program, nid, mode)
    if placed is None:
        raise NoAngelicValue(f"{mode} does not apply at {nid}")
    prog, site = placed
    report = run_suite(prog, suite, fuel, traces=False)
    evidence = {r.name: r.passed for r in report.results}
    failing = [t for t in suite if t.name in set(report.failing_names())]

    def witness(policy):
        w = AngelicWitness(nid, mode, site, policy, dict(evidence), tuple(t.name for t in failing), prog)
        for t in failing:
            w.evidence[t.name] = True
        return w

    if not failing:
        return witness(None)

    def attempt(policy) -> tuple[bool, int]:
        if clock is not None and clock.expired():
            raise TimeoutError
        ok = True
        most = 0
        # no early exit: pruning needs every test's occurrence count
        for t in failing:
            passed, occ = _run(prog, t, {site: policy}, fuel)
            most = max(most, occ)
            ok = ok and passed
        return ok, most

    for value in (True, False):
        if attempt(Uniform(value))[0]:
            return witness(Uniform(value))
    queue = deque([()])
    while queue:
        prefix = queue.popleft()
        for b in (False, True):
            seq = prefix + (b,)
            ok, most = attempt(PerOccurrence(seq))
            if ok:
                return witness(PerOccurrence(seq))
            # longer sequences only differ if the condition ran past this one
            if len(seq) < L and most > len(seq):
                queue.append(seq)
    raise NoAngelicValue(f"no angelic value at {nid} ({mode})")


# -- snapshots and synthesis ------------------------------------------------------------


@dataclass(frozen=True)
class Snapshot:
    test: str
    occurrence: int
    env: dict = field(hash=False)
    outcome: bool


@dataclass
class SynthesisSpec:
    snapshots: list
    variables: dict  # name -> type, in scope order
    constants: list


def collect_snapshots(program: Program, suite: Sequence[TestCase], witness: AngelicWitness, fuel: int = 20_000) -> SynthesisSpec:
    """Environments at every occurrence of the searched condition, with the
    outcome a replacement condition has to produce there.

    For a skip guard the required outcome is "skip", the negation of the
    placeholder's branch.
    """
    prog, site = witness.program, witness.site
    snaps: list[Snapshot] = []
    for t in suite:
        count = [0]

        def hook(nid, env, real, taken, forced, _t=t.name):
            if nid != site:
                return
            outcome = taken if witness.mode.kind != SKIP else not taken
            snaps.append(Snapshot(_t, count[0], env, outcome))
            count[0] += 1

        schedule = witness.schedule_for(t.name)
        # recording needs the condition counted even when it is not forced
        _run(prog, t, schedule, fuel, hook)
    variables = scope_at(prog, site)
    constants = function_constants(prog.function(site.fn))
    return SynthesisSpec(snaps, variables, constants)


def _eval(e, env: dict) -> object:
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, BoolLit):
        return e.value
    if isinstance(e, Len):
        return len(_eval(e.arg, env))
    if isinstance(e, Unary):
        return not _eval(e.operand, env)
    if isinstance(e, Binary):
        if e.op == "&&":
            return _eval(e.left, env) and _eval(e.right, env)
        if e.op == "||":
            return _eval(e.left, env) or _eval(e.right, env)
        a, b = _eval(e.left, env), _eval(e.right, env)
        return {"<": a < b, "<=": a <= b, ">": a > b, ">=": a >= b, "==": a == b, "!=": a != b}[e.op]
    raise TypeError(f"cannot evaluate {e!r}")


def atoms(variables: dict, constants: Sequence[int]) -> list:
    ints = [n for n, t in variables.items() if t == INT]
    bools = [n for n, t in variables.items() if t == BOOL]
    arrays = [n for n, t in variables.items() if t == ARRAY]
    out = [Var(b) for b in bools]
    out += [Unary("!", Var(b)) for b in bools]
    out += [Binary(op, Var(x), Var(y)) for x in ints for y in ints if x != y for op in REL_OPS]
    out += [Binary(op, Var(x), IntLit(c)) for x in ints for op in REL_OPS for c in constants]
    out += [Binary("==", Len(Var(a)), IntLit(0)) for a in arrays]
    return out


def expr_size(e) -> int:
    """Grammar size: atoms count 1, each connective or negation adds 1."""
    if isinstance(e, Binary) and e.op in ("&&", "||"):
        return 1 + expr_size(e.left) + expr_size(e.right)
    if isinstance(e, Unary) and not isinstance(e.operand, Var):
        return 1 + expr_size(e.operand)
    return 1


def enumerate_conditions(variables: dict, constants: Sequence[int], depth_bound: int, envs: Sequence[dict]):
    """Yield (expr, truth vector over ``envs``) by increasing size; for each
    truth vector only the first expression at a given depth survives."""
    if depth_bound < 1:
        return
    levels: dict[int, list] = {}
    seen: dict[tuple, int] = {}

    def admit(e, depth):
        vec = tuple(bool(_eval(e, env)) for env in envs)
        if seen.get(vec, depth + 1) <= depth:
            return None
        seen[vec] = depth
        return (e, vec, depth)

    first = []
    for a in atoms(variables, constants):
        item = admit(a, 1)
        if item is not None:
            first.append(item)
            yield item[0], item[1]
    levels[1] = first
    max_size = 2**depth_bound - 1
    for size in range(2, max_size + 1):
        cur = []
        for e, _, d in levels.get(size - 1, []):
            if d + 1 <= depth_bound and not (isinstance(e, Unary) and e.op == "!"):
                item = admit(Unary("!", e), d + 1)
                if item is not None:
                    cur.append(item)
                    yield item[0], item[1]
        for ls in range(1, size - 1):
            rs = size - 1 - ls
            for l, _, dl in levels.get(ls, []):
                for r, _, dr in levels.get(rs, []):
                    d = 1 + max(dl, dr)
                    if d > depth_bound:
                        continue
                    for op in ("&&", "||"):
                        item = admit(Binary(op, l, r), d)
                        if item is not None:
                            cur.append(item)
                            yield item[0], item[1]
        levels[size] = cur


def synthesize_condition(spec: SynthesisSpec, depth_bound: int = 2, candidate_budget: int = 200_000):
    """Smallest enumerated condition agreeing with every snapshot."""
    envs = [s.env for s in spec.snapshots]
    target = tuple(s.outcome for s in spec.snapshots)
    for n, (e, vec) in enumerate(enumerate_conditions(spec.variables, spec.constants, depth_bound, envs)):
        if n >= candidate_budget:
            break
        if vec == target:
            return e
    raise NoSynthesis("no condition matches the snapshots")


def materialize(program: Program, nid: NodeId, mode: Mode, cond) -> Optional[Program]:
    if mode.kind == MODIFY:
        edited = rewrite_stmt(program, nid, lambda s: (dataclasses.replace(s, cond=cond),))
    elif mode.kind == SKIP:
        edited = rewrite_stmt(program, nid, lambda s: (If(Unary("!", cond), (s,)),))
    else:
        edited = rewrite_stmt(program, nid, lambda s: (If(cond, (Return(mode.default),)), s))
    return checked(edited)


# -- pipeline -----------------------------------------------------------------------


_PRIORITY = (NO_SYNTHESIS, NO_ANGELIC, TIMEOUT)


def s2_repair(bug, config: Optional[S2Config] = None, suite: Optional[list] = None) -> RepairResult:
    config = config or S2Config()
    clock = Clock(config.time_budget)
    if suite is None:
        suite = prepare_suite(bug, config.purify, config.augment, config.seed)
    buggy: Program = bug.buggy
    report = run_suite(buggy, suite, config.fuel, traces=True)
    executed = len(suite)

    def finish(status, program=buggy, witness=None):
        return make_result(status, buggy, program, "s2", clock, tests_executed=executed, suite=suite, witness=witness)

    if report.all_pass:
        return finish(SUCCESS)
    faulty = bug.faulty_lines if config.line_assumption else None
    ranking = localize(buggy, suite, config.fuel, faulty_lines=faulty, report=report)
    seeds = ranking.nodes()[: config.k]
    chains = chains_for(buggy, report, seeds)
    merged = merge_intersections_into_ranking(ranking, config.k, chains, buggy) if chains else ranking
    seen: set = set()
    for nid, modes in candidate_locations(merged, config.top_k, buggy):
        for mode in modes:
            if clock.expired():
                seen.add(TIMEOUT)
                return finish(_worst(seen))
            try:
                w = angelic_search(buggy, suite, (nid, mode), config.fuel, config.L, clock)
            except NoAngelicValue:
                seen.add(NO_ANGELIC)
                continue
            except TimeoutError:
                seen.add(TIMEOUT)
                return finish(_worst(seen))
            executed += len(suite)
            spec = collect_snapshots(buggy, suite, w, config.fuel)
            try:
                cond = synthesize_condition(spec, config.depth_bound, config.candidate_budget)
            except NoSynthesis:
                seen.add(NO_SYNTHESIS)
                continue
            patched = materialize(buggy, nid, mode, cond)
            if patched is None:
                seen.add(NO_SYNTHESIS)
                continue
            result = finish(SUCCESS, patched, w)
            check = run_suite(apply_patch(buggy, result.patch), suite, config.fuel, traces=False)
            executed += len(suite)
            result.tests_executed = executed
            if check.all_pass:
                log.info("guard %s at %s (%s)", format_expr(cond), nid, mode)
                return result
            seen.add(NO_SYNTHESIS)
    return finish(_worst(seen or {NO_ANGELIC}))


def _worst(seen: set) -> str:
    for status in _PRIORITY:
        if status in seen:
            return status
    return NO_ANGELIC
