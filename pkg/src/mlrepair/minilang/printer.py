"""Canonical pretty-printer.

The printer is also what assigns node ids and line numbers: a program's
canonical line numbers are, by definition, the lines its statements occupy
in this layout.
"""

from __future__ import annotations

import dataclasses

from .ast import (
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

INDENT = "  "

PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
UNARY_PREC = 7


def quote(message: str) -> str:
    return '"' + message.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_expr(e, parent: int = 0, right: bool = False) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, ArrayLit):
        return "[" + ", ".join(format_expr(x) for x in e.items) + "]"
    if isinstance(e, Index):
        return f"{e.name}[{format_expr(e.index)}]"
    if isinstance(e, Len):
        return f"len({format_expr(e.arg)})"
    if isinstance(e, Call):
        return f"{e.name}(" + ", ".join(format_expr(a) for a in e.args) + ")"
    if isinstance(e, Unary):
        inner = format_expr(e.operand, UNARY_PREC)
        # `-5` would re-parse as a negative literal
        if isinstance(e.operand, Binary) or (
            e.op == "-" and isinstance(e.operand, IntLit) and e.operand.value >= 0
        ):
            inner = f"({format_expr(e.operand)})"
        return e.op + inner
    if isinstance(e, Binary):
        p = PRECEDENCE[e.op]
        text = f"{format_expr(e.left, p)} {e.op} {format_expr(e.right, p, True)}"
        if p < parent or (right and p == parent):
            return f"({text})"
        return text
    raise TypeError(f"not an expression: {e!r}")


def _stmt_head(s) -> str:
    if isinstance(s, Let):
        return f"let {s.name}: {s.type} = {format_expr(s.expr)};"
    if isinstance(s, Assign):
        return f"{s.name} = {format_expr(s.expr)};"
    if isinstance(s, SetIndex):
        return f"{s.name}[{format_expr(s.index)}] = {format_expr(s.expr)};"
    if isinstance(s, Return):
        return "return;" if s.expr is None else f"return {format_expr(s.expr)};"
    if isinstance(s, Abort):
        return f"abort({quote(s.message)});"
    if isinstance(s, ExprStmt):
        return f"{format_expr(s.expr)};"
    if isinstance(s, If):
        return f"if ({format_expr(s.cond)}) {{"
    if isinstance(s, While):
        return f"while ({format_expr(s.cond)}) {{"
    raise TypeError(f"not a statement: {s!r}")


class _Layout:
    def __init__(self, set_origin: bool):
        self.lines: list[str] = []
        self.set_origin = set_origin
        self.fn = ""
        self.counter = 0

    def _tag(self, node, line: int, **changes):
        nid = NodeId(self.fn, self.counter)
        self.counter += 1
        origin = node.origin
        if self.set_origin and origin is None:
            origin = nid
        return nid, dict(changes, nid=nid, line=line, origin=origin)

    def expr(self, e, line: int):
        nid, meta = self._tag(e, line)
        changes = {}
        if isinstance(e, ArrayLit):
            changes["items"] = tuple(self.expr(x, line) for x in e.items)
        elif isinstance(e, Index):
            changes["index"] = self.expr(e.index, line)
        elif isinstance(e, Len):
            changes["arg"] = self.expr(e.arg, line)
        elif isinstance(e, Call):
            changes["args"] = tuple(self.expr(a, line) for a in e.args)
        elif isinstance(e, Unary):
            changes["operand"] = self.expr(e.operand, line)
        elif isinstance(e, Binary):
            changes["left"] = self.expr(e.left, line)
            changes["right"] = self.expr(e.right, line)
        meta.update(changes)
        return dataclasses.replace(e, **meta)

    def block(self, stmts, depth: int) -> tuple:
        return tuple(self.stmt(s, depth) for s in stmts)

    def stmt(self, s, depth: int):
        pad = INDENT * depth
        self.lines.append(pad + _stmt_head(s))
        line = len(self.lines)
        nid, meta = self._tag(s, line)
        if isinstance(s, (Let, Assign, ExprStmt)):
            meta["expr"] = self.expr(s.expr, line)
        elif isinstance(s, SetIndex):
            meta["index"] = self.expr(s.index, line)
            meta["expr"] = self.expr(s.expr, line)
        elif isinstance(s, Return) and s.expr is not None:
            meta["expr"] = self.expr(s.expr, line)
        elif isinstance(s, If):
            meta["cond"] = self.expr(s.cond, line)
            meta["then"] = self.block(s.then, depth + 1)
            if s.orelse is not None:
                self.lines.append(pad + "} else {")
                meta["orelse"] = self.block(s.orelse, depth + 1)
            self.lines.append(pad + "}")
        elif isinstance(s, While):
            meta["cond"] = self.expr(s.cond, line)
            meta["body"] = self.block(s.body, depth + 1)
            self.lines.append(pad + "}")
        return dataclasses.replace(s, **meta)

    def function(self, fn: FunctionDef) -> FunctionDef:
        self.fn = fn.name
        self.counter = 0
        params = ", ".join(f"{p.name}: {p.type}" for p in fn.params)
        self.lines.append(f"fn {fn.name}({params}) -> {fn.ret} {{")
        line = len(self.lines)
        nid, meta = self._tag(fn, line)
        meta["body"] = self.block(fn.body, 1)
        self.lines.append("}")
        return dataclasses.replace(fn, **meta)

    def program(self, p: Program) -> Program:
        fns = []
        for i, fn in enumerate(p.functions):
            if i:
                self.lines.append("")
            fns.append(self.function(fn))
        return Program(tuple(fns))


def layout(p: Program, set_origin: bool = False) -> tuple[str, Program]:
    """Canonical text of ``p`` and a copy of ``p`` numbered against that text."""
    lay = _Layout(set_origin)
    numbered = lay.program(p)
    return "\n".join(lay.lines) + "\n", numbered


def pretty_print(p: Program) -> str:
    return layout(p)[0]


def renumber(p: Program) -> Program:
    """Reassign node ids and canonical lines, keeping origin tags."""
    return layout(p)[1]


def format_stmt(s) -> str:
    """Canonical text of one statement (nested blocks included), unindented."""
    lay = _Layout(False)
    lay.stmt(s, 0)
    return "\n".join(lay.lines)
