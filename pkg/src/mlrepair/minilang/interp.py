"""Deterministic tracing interpreter.

Every executed statement produces one trace event when it completes; every
evaluation of an ``if``/``while`` guard produces a ``branch`` event before the
chosen block runs. Events carry the dynamic data dependences (indices of the
events that last defined each value read) and the governing branch event, so
dependence graphs can be rebuilt from a trace alone.
"""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Union

from .ast import (
    ARRAY,
    BOOL,
    INT,
    Abort,
    ArrayLit,
    Assign,
    Binary,
    BoolLit,
    Call,
    ExprStmt,
    FunctionDef,
    If,
    Index,
    IntLit,
    Len,
    Let,
    NodeId,
    Program,
    Return,
    SetIndex,
    Unary,
    Var,
    While,
)

DEFAULT_FUEL = 100_000
MAX_CALL_DEPTH = 200
MAX_ARRAY_LEN = 4096

DIV_BY_ZERO = "DivByZero"
INDEX_OUT_OF_BOUNDS = "IndexOutOfBounds"
ABORT = "Abort"
ERROR_KINDS = (DIV_BY_ZERO, INDEX_OUT_OF_BOUNDS, ABORT)

if sys.getrecursionlimit() < 20000:
    sys.setrecursionlimit(20000)

Value = Union[int, bool, tuple, None]


def wrap(v: int) -> int:
    if -(2**63) <= v < 2**63:
        return v
    return ((v + 2**63) % 2**64) - 2**63


def value_type(v: Value) -> str:
    if isinstance(v, bool):
        return BOOL
    if isinstance(v, int):
        return INT
    if isinstance(v, tuple):
        return ARRAY
    return "unit"


def values_equal(a: Value, b: Value) -> bool:
    return type(a) is type(b) and a == b


# -- termination ------------------------------------------------------------


@dataclass(frozen=True)
class Normal:
    value: Value

    def matches(self, other) -> bool:
        return isinstance(other, Normal) and values_equal(self.value, other.value)


@dataclass(frozen=True)
class RuntimeFault:
    kind: str
    node_id: Optional[NodeId]
    message: str = ""

    def matches(self, other) -> bool:
        return isinstance(other, RuntimeFault) and other.kind == self.kind


@dataclass(frozen=True)
class FuelExhausted:
    def matches(self, other) -> bool:
        return isinstance(other, FuelExhausted)


Termination = Union[Normal, RuntimeFault, FuelExhausted]


# -- traces -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TraceEvent:
    step: int
    node_id: NodeId
    kind: str  # "stmt" | "branch"
    defs: tuple
    uses: tuple
    branch_outcome: Optional[bool]
    frame: int
    deps: tuple  # steps of events this one is data dependent on
    ctrl: Optional[int]  # step of the governing branch event
    real_outcome: Optional[bool] = None
    forced: bool = False


@dataclass(frozen=True)
class ExecTrace:
    events: tuple
    termination: Termination

    def coverage(self) -> frozenset:
        return frozenset(e.node_id for e in self.events)

    def last_instance(self, node_id: NodeId) -> Optional[int]:
        for e in reversed(self.events):
            if e.node_id == node_id:
                return e.step
        return None


# -- override schedules -------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    value: bool


@dataclass(frozen=True)
class PerOccurrence:
    values: tuple


Policy = Union[Uniform, PerOccurrence]
ConditionOverrideSchedule = Mapping[NodeId, Policy]


def policy_to_json(policy: Policy) -> dict:
    if isinstance(policy, Uniform):
        return {"uniform": policy.value}
    return {"per_occurrence": list(policy.values)}


# -- machinery ----------------------------------------------------------------


class _Fault(Exception):
    def __init__(self, kind: str, message: str = ""):
        self.kind = kind
        self.message = message
        self.node: Optional[NodeId] = None


class _OutOfFuel(Exception):
    pass


class _Return:
    __slots__ = ("value", "step")

    def __init__(self, value, step):
        self.value = value
        self.step = step


class _Frame:
    __slots__ = ("fid", "env", "defs")

    def __init__(self, fid: int, env: dict, defs: dict):
        self.fid = fid
        self.env = env
        self.defs = defs


class _Acc:
    """Reads performed while evaluating one statement."""

    __slots__ = ("uses", "deps")

    def __init__(self):
        self.uses: set = set()
        self.deps: set = set()


BranchHook = Callable[[NodeId, dict, Optional[bool], bool, bool], None]


class Interpreter:
    def __init__(
        self,
        program: Program,
        fuel: int = DEFAULT_FUEL,
        schedule: Optional[ConditionOverrideSchedule] = None,
        record: bool = True,
        on_branch: Optional[BranchHook] = None,
    ):
        self.program = program
        self.fns = {f.name: f for f in program.functions}
        self.fuel = fuel
        self.schedule = schedule or {}
        self.record = record
        self.on_branch = on_branch
        self.events: list[TraceEvent] = []
        self.coverage: set = set()
        self.occurrences: Counter = Counter()
        self.steps = 0
        self.depth = 0
        self.nframes = 0

    # -- entry ---------------------------------------------------------------

    def run(self, fn_name: str, args) -> Termination:
        fn = self.fns.get(fn_name)
        if fn is None:
            raise ValueError(f"no function named {fn_name}")
        args = tuple(args)
        if len(args) != len(fn.params):
            raise ValueError(f"{fn_name} expects {len(fn.params)} arguments")
        for p, a in zip(fn.params, args):
            if value_type(a) != p.type:
                raise ValueError(f"argument {p.name} of {fn_name} must be {p.type}")
        try:
            value, _ = self.call(fn, args, [frozenset()] * len(args), None)
            return Normal(value)
        except _Fault as f:
            return RuntimeFault(f.kind, f.node, f.message)
        except _OutOfFuel:
            return FuelExhausted()

    # -- events ----------------------------------------------------------------

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.fuel:
            raise _OutOfFuel()

    def emit(self, node, kind, frame, acc, ctrl, defs=(), outcome=None, real=None, forced=False):
        self.tick()
        self.coverage.add(node.nid)
        if not self.record:
            return -1
        step = len(self.events)
        self.events.append(
            TraceEvent(
                step=step,
                node_id=node.nid,
                kind=kind,
                defs=tuple(defs),
                uses=tuple(sorted(acc.uses)) if acc is not None else (),
                branch_outcome=outcome,
                frame=frame.fid,
                deps=tuple(sorted(acc.deps)) if acc is not None else (),
                ctrl=ctrl,
                real_outcome=real,
                forced=forced,
            )
        )
        return step

    def define(self, frame: _Frame, name: str, step: int) -> None:
        if self.record:
            frame.defs[name] = frozenset((step,))

    # -- functions and blocks ----------------------------------------------------

    def call(self, fn: FunctionDef, args: tuple, arg_deps: list, ctrl):
        if self.depth >= MAX_CALL_DEPTH:
            raise _OutOfFuel()
        self.tick()
        frame = _Frame(self.nframes, {}, {})
        self.nframes += 1
        for p, a, d in zip(fn.params, args, arg_deps):
            frame.env[p.name] = a
            frame.defs[p.name] = d
        self.depth += 1
        try:
            ret = self.block(fn.body, frame, ctrl)
        finally:
            self.depth -= 1
        if ret is None:
            return None, None
        return ret.value, ret.step

    def block(self, stmts, frame: _Frame, ctrl):
        declared = []
        try:
            for s in stmts:
                r = self.stmt(s, frame, ctrl)
                if isinstance(s, Let):
                    declared.append(s.name)
                if r is not None:
                    return r
            return None
        finally:
            for name in declared:
                frame.env.pop(name, None)
                frame.defs.pop(name, None)

    def stmt(self, s, frame: _Frame, ctrl):
        acc = _Acc() if self.record else None
        try:
            if isinstance(s, If):
                taken = self.guard(s, frame, acc, ctrl)
                step = len(self.events) - 1
                if taken:
                    return self.block(s.then, frame, step)
                if s.orelse is not None:
                    return self.block(s.orelse, frame, step)
                return None
            if isinstance(s, While):
                while True:
                    if not self.guard(s, frame, acc, ctrl):
                        return None
                    step = len(self.events) - 1
                    r = self.block(s.body, frame, step)
                    if r is not None:
                        return r
                    acc = _Acc() if self.record else None
            if isinstance(s, Let):
                v = self.eval(s.expr, frame, acc, ctrl)
                frame.env[s.name] = v
                step = self.emit(s, "stmt", frame, acc, ctrl, defs=(s.name,))
                self.define(frame, s.name, step)
                return None
            if isinstance(s, Assign):
                v = self.eval(s.expr, frame, acc, ctrl)
                frame.env[s.name] = v
                step = self.emit(s, "stmt", frame, acc, ctrl, defs=(s.name,))
                self.define(frame, s.name, step)
                return None
            if isinstance(s, SetIndex):
                i = self.eval(s.index, frame, acc, ctrl)
                v = self.eval(s.expr, frame, acc, ctrl)
                arr = self.read(s.name, frame, acc)
                if not 0 <= i < len(arr):
                    raise _Fault(INDEX_OUT_OF_BOUNDS, f"index {i} out of bounds for length {len(arr)}")
                frame.env[s.name] = arr[:i] + (v,) + arr[i + 1 :]
                step = self.emit(s, "stmt", frame, acc, ctrl, defs=(s.name,))
                self.define(frame, s.name, step)
                return None
            if isinstance(s, Return):
                v = None if s.expr is None else self.eval(s.expr, frame, acc, ctrl)
                step = self.emit(s, "stmt", frame, acc, ctrl)
                return _Return(v, step)
            if isinstance(s, Abort):
                self.emit(s, "stmt", frame, acc, ctrl)
                f = _Fault(ABORT, s.message)
                f.node = s.nid
                raise f
            if isinstance(s, ExprStmt):
                self.eval(s.expr, frame, acc, ctrl)
                self.emit(s, "stmt", frame, acc, ctrl)
                return None
        except _Fault as f:
            if f.node is None:
                f.node = s.nid
                self.emit(s, "stmt", frame, acc, ctrl)
            raise
        raise TypeError(f"unknown statement {s!r}")

    def guard(self, s, frame: _Frame, acc, ctrl) -> bool:
        nid = s.nid
        policy = self.schedule.get(nid)
        forced = None
        if policy is not None:
            k = self.occurrences[nid]
            self.occurrences[nid] = k + 1
            if isinstance(policy, Uniform):
                forced = policy.value
            elif k < len(policy.values):
                forced = policy.values[k]
        if forced is None:
            real = self.eval(s.cond, frame, acc, ctrl)
            taken = real
        else:
            real = self.silent_eval(s.cond, frame)
            taken = forced
        if self.on_branch is not None:
            self.on_branch(nid, dict(frame.env), real, taken, forced is not None)
        self.emit(
            s, "branch", frame, None if forced is not None else acc, ctrl,
            outcome=taken, real=real, forced=forced is not None,
        )
        return taken

    def silent_eval(self, e, frame: _Frame) -> Optional[bool]:
        """Real value of a guard without tracing, fuel use or overrides."""
        shadow = Interpreter(self.program, self.fuel, record=False)
        shadow.depth = self.depth
        try:
            return shadow.eval(e, _Frame(-1, dict(frame.env), {}), None, None)
        except (_Fault, _OutOfFuel):
            return None

    # -- expressions ---------------------------------------------------------------

    def read(self, name: str, frame: _Frame, acc):
        if acc is not None:
            acc.uses.add(name)
            d = frame.defs.get(name)
            if d:
                acc.deps.update(d)
        return frame.env[name]

    def eval(self, e, frame: _Frame, acc, ctrl):
        t = type(e)
        if t is IntLit or t is BoolLit:
            return e.value
        if t is Var:
            return self.read(e.name, frame, acc)
        if t is Binary:
            op = e.op
            if op == "&&":
                return self.eval(e.left, frame, acc, ctrl) and self.eval(e.right, frame, acc, ctrl)
            if op == "||":
                return self.eval(e.left, frame, acc, ctrl) or self.eval(e.right, frame, acc, ctrl)
            a = self.eval(e.left, frame, acc, ctrl)
            b = self.eval(e.right, frame, acc, ctrl)
            if op == "+":
                return wrap(a + b)
            if op == "-":
                return wrap(a - b)
            if op == "*":
                return wrap(a * b)
            if op == "/" or op == "%":
                if b == 0:
                    raise _Fault(DIV_BY_ZERO, "division by zero")
                q = abs(a) // abs(b)
                if (a < 0) != (b < 0):
                    q = -q
                return wrap(q) if op == "/" else wrap(a - b * q)
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            if op == ">=":
                return a >= b
            if op == "==":
                return a == b
            if op == "!=":
                return a != b
            raise TypeError(op)
        if t is Unary:
            v = self.eval(e.operand, frame, acc, ctrl)
            return (not v) if e.op == "!" else wrap(-v)
        if t is Index:
            i = self.eval(e.index, frame, acc, ctrl)
            arr = self.read(e.name, frame, acc)
            if not 0 <= i < len(arr):
                raise _Fault(INDEX_OUT_OF_BOUNDS, f"index {i} out of bounds for length {len(arr)}")
            return arr[i]
        if t is Len:
            return len(self.eval(e.arg, frame, acc, ctrl))
        if t is ArrayLit:
            if len(e.items) > MAX_ARRAY_LEN:
                raise _Fault(INDEX_OUT_OF_BOUNDS, "array literal too long")
            return tuple(self.eval(x, frame, acc, ctrl) for x in e.items)
        if t is Call:
            fn = self.fns[e.name]
            args = []
            arg_deps = []
            for a in e.args:
                if acc is None:
                    args.append(self.eval(a, frame, None, ctrl))
                    arg_deps.append(frozenset())
                else:
                    sub = _Acc()
                    args.append(self.eval(a, frame, sub, ctrl))
                    acc.uses |= sub.uses
                    acc.deps |= sub.deps
                    arg_deps.append(frozenset(sub.deps))
            value, ret_step = self.call(fn, tuple(args), arg_deps, ctrl)
            if acc is not None and ret_step is not None:
                acc.deps.add(ret_step)
            return value
        raise TypeError(f"unknown expression {e!r}")


# -- public API -----------------------------------------------------------------


def execute(program: Program, fn: str, args, fuel: int = DEFAULT_FUEL) -> tuple[Termination, ExecTrace]:
    """Run ``fn(*args)`` and return its termination and full trace."""
    return execute_with_overrides(program, fn, args, {}, fuel)


def execute_with_overrides(
    program: Program,
    fn: str,
    args,
    schedule: ConditionOverrideSchedule,
    fuel: int = DEFAULT_FUEL,
    on_branch: Optional[BranchHook] = None,
) -> tuple[Termination, ExecTrace]:
    """Like :func:`execute`, but guard occurrences named in ``schedule`` take
    the forced outcome. The real outcome is still evaluated, without side
    effects, and stored on the branch event."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    interp = Interpreter(program, fuel, schedule, record=True, on_branch=on_branch)
    term = interp.run(fn, args)
    return term, ExecTrace(tuple(interp.events), term)


def run_quiet(
    program: Program,
    fn: str,
    args,
    fuel: int = DEFAULT_FUEL,
    schedule: Optional[ConditionOverrideSchedule] = None,
    on_branch: Optional[BranchHook] = None,
) -> tuple[Termination, frozenset, Counter]:
    """Untraced run: termination, covered node ids and guard occurrence counts."""
    interp = Interpreter(program, fuel, schedule, record=False, on_branch=on_branch)
    term = interp.run(fn, args)
    return term, frozenset(interp.coverage), interp.occurrences
