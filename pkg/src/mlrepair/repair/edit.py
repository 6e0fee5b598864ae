"""Functional statement and expression rewriting on numbered programs."""

from __future__ import annotations

import dataclasses
from typing import Callable, Iterator, Optional

from ..minilang.ast import FunctionDef, If, IntLit, NodeId, Program, While, iter_nodes
from ..minilang.printer import renumber
from ..minilang.typecheck import scoped_statements, well_typed

# expression-valued fields per node class; tuple-valued fields hold several
_EXPR_FIELDS = {
    "Let": ("expr",),
    "Assign": ("expr",),
    "SetIndex": ("index", "expr"),
    "If": ("cond",),
    "While": ("cond",),
    "Return": ("expr",),
    "ExprStmt": ("expr",),
    "ArrayLit": ("items",),
    "Index": ("index",),
    "Len": ("arg",),
    "Call": ("args",),
    "Unary": ("operand",),
    "Binary": ("left", "right"),
}


def expr_sites(node, path: tuple = ()) -> Iterator[tuple[tuple, object]]:
    """(path, subexpression) for every expression under a statement header,
    pre-order."""
    for f in _EXPR_FIELDS.get(type(node).__name__, ()):
        value = getattr(node, f)
        if value is None:
            continue
        if isinstance(value, tuple):
            for i, child in enumerate(value):
                p = path + ((f, i),)
                yield p, child
                yield from expr_sites(child, p)
        else:
            p = path + ((f, None),)
            yield p, value
            yield from expr_sites(value, p)


def replace_at(node, path: tuple, new):
    if not path:
        return new
    f, i = path[0]
    value = getattr(node, f)
    if i is None:
        return dataclasses.replace(node, **{f: replace_at(value, path[1:], new)})
    items = list(value)
    items[i] = replace_at(items[i], path[1:], new)
    return dataclasses.replace(node, **{f: tuple(items)})


def _rewrite_block(block: tuple, target: NodeId, fn: Callable) -> tuple[tuple, bool]:
    out = []
    hit = False
    for s in block:
        if not hit and s.nid == target:
            out.extend(fn(s))
            hit = True
            continue
        if not hit and isinstance(s, If):
            then, hit = _rewrite_block(s.then, target, fn)
            orelse = s.orelse
            if not hit and orelse is not None:
                orelse, hit = _rewrite_block(orelse, target, fn)
            if hit:
                s = dataclasses.replace(s, then=then, orelse=orelse)
        elif not hit and isinstance(s, While):
            body, hit = _rewrite_block(s.body, target, fn)
            if hit:
                s = dataclasses.replace(s, body=body)
        out.append(s)
    return tuple(out), hit


def rewrite_stmt(program: Program, target: NodeId, fn: Callable) -> Program:
    """Replace the statement ``target`` by the statements ``fn(stmt)``
    returns, then renumber. Origin tags of untouched nodes survive."""
    functions = []
    for f in program.functions:
        if f.name == target.fn:
            body, hit = _rewrite_block(f.body, target, fn)
            if not hit:
                raise KeyError(f"no statement {target}")
            f = dataclasses.replace(f, body=body)
        functions.append(f)
    return renumber(Program(tuple(functions)))


def checked(program: Program) -> Optional[Program]:
    return program if well_typed(program) else None


def scope_at(program: Program, nid: NodeId) -> dict:
    """Variables (name -> type) in scope just before statement ``nid``."""
    for s, scope in scoped_statements(program.function(nid.fn)):
        if s.nid == nid:
            return scope
    raise KeyError(f"no statement {nid}")


def function_constants(fn: FunctionDef) -> list[int]:
    """{-1, 0, 1} plus every integer literal in ``fn``, ascending."""
    found = {-1, 0, 1}
    for n in iter_nodes(fn):
        if isinstance(n, IntLit):
            found.add(n.value)
    return sorted(found)


def find_by_origin(program: Program, origin: NodeId):
    for s in program.statements():
        if s.origin == origin:
            return s
    return None

