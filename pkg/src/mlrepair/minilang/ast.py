"""Typed AST for MiniLang.

Nodes are frozen dataclasses. Structural equality ignores the bookkeeping
fields (``nid``, ``line``, ``origin``), so two programs compare equal when
they have the same shape regardless of where they came from.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Optional, Union

INT = "int"
BOOL = "bool"
ARRAY = "int[]"
UNIT = "unit"
TYPES = (INT, BOOL, ARRAY)

REL_OPS = ("<", "<=", ">", ">=", "==", "!=")
ARITH_OPS = ("+", "-", "*", "/", "%")
LOGIC_OPS = ("&&", "||")


class NodeId(NamedTuple):
    fn: str
    index: int

    def __str__(self) -> str:
        return f"{self.fn}#{self.index}"

    @classmethod
    def parse(cls, text: str) -> "NodeId":
        fn, _, idx = text.rpartition("#")
        return cls(fn, int(idx))


@dataclass(frozen=True)
class Node:
    nid: Optional[NodeId] = field(default=None, compare=False, repr=False, kw_only=True)
    line: int = field(default=0, compare=False, repr=False, kw_only=True)
    # node id in the program as originally parsed; survives edits
    origin: Optional[NodeId] = field(default=None, compare=False, repr=False, kw_only=True)


# -- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class IntLit(Node):
    value: int


@dataclass(frozen=True)
class BoolLit(Node):
    value: bool


@dataclass(frozen=True)
class ArrayLit(Node):
    items: tuple


@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Index(Node):
    name: str
    index: "Expr"


@dataclass(frozen=True)
class Len(Node):
    arg: "Expr"


@dataclass(frozen=True)
class Call(Node):
    name: str
    args: tuple


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, BoolLit, ArrayLit, Var, Index, Len, Call, Unary, Binary]

# -- statements ------------------------------------------------------------


@dataclass(frozen=True)
class Let(Node):
    name: str
    type: str
    expr: Expr


@dataclass(frozen=True)
class Assign(Node):
    name: str
    expr: Expr


@dataclass(frozen=True)
class SetIndex(Node):
    name: str
    index: Expr
    expr: Expr


@dataclass(frozen=True)
class If(Node):
    cond: Expr
    then: tuple
    orelse: Optional[tuple] = None


@dataclass(frozen=True)
class While(Node):
    cond: Expr
    body: tuple


@dataclass(frozen=True)
class Return(Node):
    expr: Optional[Expr] = None


@dataclass(frozen=True)
class Abort(Node):
    message: str


@dataclass(frozen=True)
class ExprStmt(Node):
    expr: Expr


Stmt = Union[Let, Assign, SetIndex, If, While, Return, Abort, ExprStmt]
STMT_TYPES = (Let, Assign, SetIndex, If, While, Return, Abort, ExprStmt)
GUARD_TYPES = (If, While)


class Param(NamedTuple):
    name: str
    type: str


@dataclass(frozen=True)
class FunctionDef(Node):
    name: str
    params: tuple
    ret: str
    body: tuple


@dataclass(frozen=True)
class Program:
    functions: tuple

    def function(self, name: str) -> FunctionDef:
        for fn in self.functions:
            if fn.name == name:
                return fn
        raise KeyError(name)

    def function_names(self) -> list[str]:
        return [fn.name for fn in self.functions]

    def statements(self) -> Iterator[Stmt]:
        for fn in self.functions:
            yield from iter_stmts(fn.body)

    def nodes(self) -> Iterator[Node]:
        for fn in self.functions:
            yield from iter_nodes(fn)

    def node_index(self) -> dict[NodeId, Node]:
        return {n.nid: n for n in self.nodes()}

    def stmt_at(self, fn: str, line: int) -> Optional[Stmt]:
        for s in iter_stmts(self.function(fn).body):
            if s.line == line:
                return s
        return None


def is_stmt(node: object) -> bool:
    return isinstance(node, STMT_TYPES)


def child_blocks(stmt: Stmt) -> list[tuple]:
    if isinstance(stmt, If):
        return [stmt.then] if stmt.orelse is None else [stmt.then, stmt.orelse]
    if isinstance(stmt, While):
        return [stmt.body]
    return []


def iter_stmts(block: tuple) -> Iterator[Stmt]:
    """Statements of a block and all nested blocks, in source order."""
    for s in block:
        yield s
        for sub in child_blocks(s):
            yield from iter_stmts(sub)


def expr_children(node: Node) -> list[Node]:
    if isinstance(node, ArrayLit):
        return list(node.items)
    if isinstance(node, (Index,)):
        return [node.index]
    if isinstance(node, Len):
        return [node.arg]
    if isinstance(node, Call):
        return list(node.args)
    if isinstance(node, Unary):
        return [node.operand]
    if isinstance(node, Binary):
        return [node.left, node.right]
    return []


def stmt_exprs(stmt: Stmt) -> list[Expr]:
    """Expressions owned directly by a statement (not by nested blocks)."""
    if isinstance(stmt, (Let, Assign, ExprStmt)):
        return [stmt.expr]
    if isinstance(stmt, SetIndex):
        return [stmt.index, stmt.expr]
    if isinstance(stmt, (If, While)):
        return [stmt.cond]
    if isinstance(stmt, Return):
        return [] if stmt.expr is None else [stmt.expr]
    return []


def iter_nodes(node: Node) -> Iterator[Node]:
    """Pre-order walk. Statement expressions come before nested blocks."""
    yield node
    if isinstance(node, FunctionDef):
        for s in node.body:
            yield from iter_nodes(s)
        return
    if is_stmt(node):
        for e in stmt_exprs(node):
            yield from iter_nodes(e)
        for block in child_blocks(node):
            for s in block:
                yield from iter_nodes(s)
        return
    for c in expr_children(node):
        yield from iter_nodes(c)


def iter_expr(expr: Expr) -> Iterator[Node]:
    yield expr
    for c in expr_children(expr):
        yield from iter_expr(c)


def vars_read(node: Node) -> set[str]:
    """Variable names read anywhere under an expression or statement header."""
    roots = stmt_exprs(node) if is_stmt(node) else [node]
    names: set[str] = set()
    for r in roots:
        for n in iter_expr(r):
            if isinstance(n, (Var, Index)):
                names.add(n.name)
    if isinstance(node, SetIndex):
        names.add(node.name)
    return names


def strip_meta(node):
    """Copy of a node tree with all bookkeeping fields cleared."""
    if isinstance(node, tuple) and not hasattr(node, "_fields"):
        return tuple(strip_meta(x) for x in node)
    if not isinstance(node, Node):
        return node
    changes = {}
    for f in dataclasses.fields(node):
        if f.name in ("nid", "line", "origin"):
            continue
        v = getattr(node, f.name)
        if isinstance(v, (Node, tuple)):
            changes[f.name] = strip_meta(v)
    return dataclasses.replace(node, nid=None, line=0, origin=None, **changes)
