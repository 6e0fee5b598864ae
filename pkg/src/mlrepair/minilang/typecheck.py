"""Static scoping and type rules."""

from __future__ import annotations

from typing import Iterator, Optional

from .ast import (
    ARRAY,
    BOOL,
    INT,
    UNIT,
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
    Program,
    Return,
    SetIndex,
    Unary,
    Var,
    While,
)
from .errors import TypeCheckError

_ARITH = {"+", "-", "*", "/", "%"}
_ORDER = {"<", "<=", ">", ">="}
_EQ = {"==", "!="}
_LOGIC = {"&&", "||"}


class _Checker:
    def __init__(self, program: Program, positions: Optional[dict] = None):
        self.program = program
        self.positions = positions or {}
        self.sigs: dict[str, FunctionDef] = {}
        self.fn: Optional[FunctionDef] = None
        self.scopes: list[dict[str, str]] = []

    def fail(self, message: str, node=None) -> TypeCheckError:
        line, col = self.positions.get(id(node), (getattr(node, "line", 0), 0))
        where = f" in function {self.fn.name}" if self.fn is not None else ""
        return TypeCheckError(message + where, line, col)

    def lookup(self, name: str, node) -> str:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise self.fail(f"undeclared variable {name}", node)

    def declare(self, name: str, ty: str, node) -> None:
        if any(name in s for s in self.scopes):
            raise self.fail(f"variable {name} already declared", node)
        if name in self.sigs or name == "len":
            raise self.fail(f"variable {name} shadows a function", node)
        self.scopes[-1][name] = ty

    def run(self) -> None:
        for fn in self.program.functions:
            if fn.name in self.sigs:
                raise self.fail(f"duplicate function {fn.name}", fn)
            if fn.name == "len":
                raise self.fail("len is a builtin", fn)
            self.sigs[fn.name] = fn
        for fn in self.program.functions:
            self.function(fn)
        self.fn = None

    def function(self, fn: FunctionDef) -> None:
        self.fn = fn
        self.scopes = [{}]
        for p in fn.params:
            self.declare(p.name, p.type, fn)
        terminates = self.block(fn.body, new_scope=False)
        if fn.ret != UNIT and not terminates:
            raise self.fail("missing return", fn)

    def block(self, stmts, new_scope: bool = True) -> bool:
        if new_scope:
            self.scopes.append({})
        terminates = False
        for s in stmts:
            if self.stmt(s):
                terminates = True
        if new_scope:
            self.scopes.pop()
        return terminates

    def stmt(self, s) -> bool:
        """Check one statement; True when it never falls through."""
        if isinstance(s, Let):
            self.expect(s.expr, s.type)
            self.declare(s.name, s.type, s)
            return False
        if isinstance(s, Assign):
            self.expect(s.expr, self.lookup(s.name, s))
            return False
        if isinstance(s, SetIndex):
            if self.lookup(s.name, s) != ARRAY:
                raise self.fail(f"{s.name} is not an array", s)
            self.expect(s.index, INT)
            self.expect(s.expr, INT)
            return False
        if isinstance(s, If):
            self.expect(s.cond, BOOL)
            t = self.block(s.then)
            e = self.block(s.orelse) if s.orelse is not None else False
            return t and e
        if isinstance(s, While):
            self.expect(s.cond, BOOL)
            self.block(s.body)
            return False
        if isinstance(s, Return):
            if s.expr is None:
                if self.fn.ret != UNIT:
                    raise self.fail("return without a value", s)
            else:
                if self.fn.ret == UNIT:
                    raise self.fail("unit function returns a value", s)
                self.expect(s.expr, self.fn.ret)
            return True
        if isinstance(s, Abort):
            return True
        if isinstance(s, ExprStmt):
            self.expr(s.expr, allow_unit=True)
            return False
        raise self.fail(f"unknown statement {type(s).__name__}", s)

    def expect(self, e, ty: str) -> None:
        got = self.expr(e)
        if got != ty:
            raise self.fail(f"type mismatch: expected {ty}, found {got}", e)

    def expr(self, e, allow_unit: bool = False) -> str:
        if isinstance(e, IntLit):
            if not -(2**63) <= e.value < 2**63:
                raise self.fail("integer literal out of range", e)
            return INT
        if isinstance(e, BoolLit):
            return BOOL
        if isinstance(e, ArrayLit):
            for item in e.items:
                self.expect(item, INT)
            return ARRAY
        if isinstance(e, Var):
            return self.lookup(e.name, e)
        if isinstance(e, Index):
            if self.lookup(e.name, e) != ARRAY:
                raise self.fail(f"{e.name} is not an array", e)
            self.expect(e.index, INT)
            return INT
        if isinstance(e, Len):
            self.expect(e.arg, ARRAY)
            return INT
        if isinstance(e, Call):
            sig = self.sigs.get(e.name)
            if sig is None:
                raise self.fail(f"undeclared function {e.name}", e)
            if len(sig.params) != len(e.args):
                raise self.fail(
                    f"{e.name} expects {len(sig.params)} arguments, got {len(e.args)}", e
                )
            for p, a in zip(sig.params, e.args):
                self.expect(a, p.type)
            if sig.ret == UNIT and not allow_unit:
                raise self.fail(f"unit function {e.name} used as a value", e)
            return sig.ret
        if isinstance(e, Unary):
            if e.op == "!":
                self.expect(e.operand, BOOL)
                return BOOL
            self.expect(e.operand, INT)
            return INT
        if isinstance(e, Binary):
            if e.op in _ARITH:
                self.expect(e.left, INT)
                self.expect(e.right, INT)
                return INT
            if e.op in _ORDER:
                self.expect(e.left, INT)
                self.expect(e.right, INT)
                return BOOL
            if e.op in _LOGIC:
                self.expect(e.left, BOOL)
                self.expect(e.right, BOOL)
                return BOOL
            if e.op in _EQ:
                lt = self.expr(e.left)
                self.expect(e.right, lt)
                return BOOL
        raise self.fail(f"unknown expression {type(e).__name__}", e)


def check_program(program: Program, positions: Optional[dict] = None) -> None:
    """Raise TypeCheckError unless ``program`` is well scoped and well typed."""
    _Checker(program, positions).run()


def well_typed(program: Program) -> bool:
    try:
        check_program(program)
    except TypeCheckError:
        return False
    return True


def expr_type(program: Program, fn: FunctionDef, scope: dict[str, str], e) -> str:
    """Type of ``e`` under ``scope``; raises TypeCheckError when ill-typed."""
    c = _Checker(program)
    c.sigs = {f.name: f for f in program.functions}
    c.fn = fn
    c.scopes = [dict(scope)]
    return c.expr(e)


def scoped_statements(fn: FunctionDef) -> Iterator[tuple[object, dict[str, str]]]:
    """Each statement of ``fn`` with the variables in scope just before it.

    Scopes are insertion-ordered dicts (parameters first, then lets in
    declaration order).
    """

    def walk(block, scope):
        local = dict(scope)
        for s in block:
            yield s, dict(local)
            if isinstance(s, If):
                yield from walk(s.then, local)
                if s.orelse is not None:
                    yield from walk(s.orelse, local)
            elif isinstance(s, While):
                yield from walk(s.body, local)
            elif isinstance(s, Let):
                local[s.name] = s.type

    yield from walk(fn.body, {p.name: p.type for p in fn.params})
