"""Chunk signatures and the multi-location patch classifier."""

from __future__ import annotations

import enum
from itertools import combinations
from typing import Optional

from ..minilang.ast import (
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
from .diff import Chunk, Patch
from .ted import normalized_distance

SIMILARITY_THRESHOLD = 0.7


class PatchClass(str, enum.Enum):
    SINGLE_LOCATION = "SingleLocation"
    SIMILAR_EXACT = "SimilarExact"
    SIMILAR = "Similar"
    RELEVANT = "Relevant"
    OTHER = "Other"

    def __str__(self) -> str:
        return self.value


# -- signatures -----------------------------------------------------------------


class _Abstractor:
    """Builds signature trees, numbering identifiers by first appearance."""

    def __init__(self):
        self.names: dict[str, str] = {}

    def ph(self, name: str):
        if name not in self.names:
            self.names[name] = f"${len(self.names)}"
        return (self.names[name], ())

    def block(self, label: str, stmts) -> tuple:
        return (label, tuple(self.node(s) for s in stmts))

    def node(self, n) -> tuple:
        if isinstance(n, IntLit):
            return ("#", ())
        if isinstance(n, BoolLit):
            return ("true" if n.value else "false", ())
        if isinstance(n, ArrayLit):
            return ("ArrayLit", tuple(self.node(x) for x in n.items))
        if isinstance(n, Var):
            return self.ph(n.name)
        if isinstance(n, Index):
            return ("Index", (self.ph(n.name), self.node(n.index)))
        if isinstance(n, Len):
            return ("Len", (self.node(n.arg),))
        if isinstance(n, Call):
            return ("Call", (self.ph(n.name),) + tuple(self.node(a) for a in n.args))
        if isinstance(n, Unary):
            return ("Unary" + n.op, (self.node(n.operand),))
        if isinstance(n, Binary):
            return ("Binary" + n.op, (self.node(n.left), self.node(n.right)))
        if isinstance(n, Let):
            return ("Let:" + n.type, (self.ph(n.name), self.node(n.expr)))
        if isinstance(n, Assign):
            return ("Assign", (self.ph(n.name), self.node(n.expr)))
        if isinstance(n, SetIndex):
            return ("SetIndex", (self.ph(n.name), self.node(n.index), self.node(n.expr)))
        if isinstance(n, If):
            kids = (self.node(n.cond), self.block("then", n.then))
            if n.orelse is not None:
                kids += (self.block("else", n.orelse),)
            return ("If", kids)
        if isinstance(n, While):
            return ("While", (self.node(n.cond), self.block("body", n.body)))
        if isinstance(n, Return):
            return ("Return", () if n.expr is None else (self.node(n.expr),))
        if isinstance(n, Abort):
            return ("Abort", (('"..."', ()),))
        if isinstance(n, ExprStmt):
            return ("ExprStmt", (self.node(n.expr),))
        if isinstance(n, FunctionDef):
            params = tuple(("Param:" + p.type, (self.ph(p.name),)) for p in n.params)
            return ("Function:" + n.ret, (self.ph(n.name), ("params", params), self.block("body", n.body)))
        raise TypeError(f"cannot sign {type(n).__name__}")


def chunk_signature(c: Chunk) -> tuple:
    """Action kind plus the abstracted shape of both fragments, as a tree."""
    ab = _Abstractor()
    removed = ("removed", tuple(ab.node(n) for n in c.removed))
    added = ("added", tuple(ab.node(n) for n in c.added))
    return (c.action, (removed, added))


def chunks_similar(a: Chunk, b: Chunk, threshold: float = SIMILARITY_THRESHOLD) -> tuple[bool, float]:
    sim = 1.0 - normalized_distance(chunk_signature(a), chunk_signature(b))
    return (a.action == b.action and sim >= threshold, sim)


# -- relatedness ----------------------------------------------------------------


def _walk(n, fn: str, refs: set, defs: set) -> None:
    if isinstance(n, FunctionDef):
        defs.add(("fn", n.name))
        refs.add(("fn", n.name))
        for p in n.params:
            refs.add(("var", n.name, p.name))
        for s in n.body:
            _walk(s, n.name, refs, defs)
        return
    if isinstance(n, (Var, Index)):
        refs.add(("var", fn, n.name))
    elif isinstance(n, Call):
        refs.add(("fn", n.name))
    elif isinstance(n, (Let, Assign, SetIndex)):
        refs.add(("var", fn, n.name))
        defs.add(("var", fn, n.name))
    for k in _children(n):
        _walk(k, fn, refs, defs)


def _children(n) -> list:
    if isinstance(n, If):
        return [n.cond, *n.then, *(n.orelse or ())]
    if isinstance(n, While):
        return [n.cond, *n.body]
    if isinstance(n, ArrayLit):
        return list(n.items)
    if isinstance(n, Index):
        return [n.index]
    if isinstance(n, Len):
        return [n.arg]
    if isinstance(n, Call):
        return list(n.args)
    if isinstance(n, Unary):
        return [n.operand]
    if isinstance(n, Binary):
        return [n.left, n.right]
    if isinstance(n, (Let, Assign, ExprStmt)):
        return [n.expr]
    if isinstance(n, SetIndex):
        return [n.index, n.expr]
    if isinstance(n, Return):
        return [] if n.expr is None else [n.expr]
    return []


def chunk_names(c: Chunk) -> tuple[set, set]:
    """(identifiers referenced, identifiers defined) by a chunk's fragments.

    Variables are keyed by their function, function names globally.
    """
    refs: set = set()
    defs: set = set()
    for n in c.removed + c.added:
        _walk(n, c.fn, refs, defs)
    return refs, defs


def chunks_related(a: Chunk, b: Chunk, base: Optional[Program] = None) -> bool:
    if not a.function_level and not b.function_level and a.fn == b.fn:
        return True
    refs_a, defs_a = chunk_names(a)
    refs_b, defs_b = chunk_names(b)
    return bool(defs_a & refs_b or defs_b & refs_a)


def classify(patch: Patch, base: Optional[Program] = None, threshold: float = SIMILARITY_THRESHOLD) -> PatchClass:
    chunks = patch.chunks
    if len(chunks) == 0:
        raise ValueError("empty patch")
    if len(chunks) == 1:
        return PatchClass.SINGLE_LOCATION
    pairs = list(combinations(chunks, 2))
    if any(chunks_related(a, b, base) for a, b in pairs):
        return PatchClass.RELEVANT
    verdicts = [chunks_similar(a, b, threshold) for a, b in pairs]
    if all(ok for ok, _ in verdicts):
        if all(sim == 1.0 for _, sim in verdicts):
            return PatchClass.SIMILAR_EXACT
        return PatchClass.SIMILAR
    return PatchClass.OTHER
