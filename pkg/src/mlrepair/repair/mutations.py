"""Statement-level mutation operators for generate-and-validate repair."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

from ..minilang.ast import (
    ARITH_OPS,
    ARRAY,
    BOOL,
    INT,
    REL_OPS,
    UNIT,
    Abort,
    ArrayLit,
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
    strip_meta,
)
from ..minilang.printer import format_expr, format_stmt
from .edit import checked, expr_sites, function_constants, replace_at, rewrite_stmt, scope_at

# fixed operator order; the greedy search breaks ties by this position
KINDS = (
    "ReplaceRelOp",
    "ReplaceArithOp",
    "NegateCondition",
    "GuardConjoin",
    "GuardDisjoin",
    "ReplaceConstant",
    "ReplaceVariable",
    "InsertGuardAbort",
    "InsertGuardReturn",
    "DeleteStatement",
    "ReplaceWithIngredient",
)

GUARD_MESSAGE = "guard"


@dataclass(frozen=True)
class MutationOperator:
    kind: str
    target: NodeId
    params: tuple
    replacement: tuple = field(compare=False, repr=False)

    def describe(self) -> str:
        shown = ", ".join(str(p) for p in self.params)
        return f"{self.kind}@{self.target}({shown})"

    def to_json(self) -> dict:
        return {"kind": self.kind, "target": str(self.target), "params": [str(p) for p in self.params]}


def apply_mutation(program: Program, op: MutationOperator) -> Optional[Program]:
    """The mutated program, or None when it does not type-check."""
    return checked(rewrite_stmt(program, op.target, lambda s: op.replacement))


def default_values(ret: str) -> list:
    """Type-matched fallback return values."""
    return {INT: [IntLit(0), IntLit(-1)], BOOL: [BoolLit(False)], ARRAY: [ArrayLit(())]}.get(ret, [])


def guard_templates(scope: dict, consts: Sequence[int]) -> list:
    """Candidate guard conditions built from in-scope names and constants."""
    ints = [n for n, t in scope.items() if t == INT]
    bools = [n for n, t in scope.items() if t == BOOL]
    arrays = [n for n, t in scope.items() if t == ARRAY]
    out = []
    for v in ints:
        for op in REL_OPS:
            for c in consts:
                out.append(Binary(op, Var(v), IntLit(c)))
    for a in ints:
        for b in ints:
            if a != b:
                for op in REL_OPS:
                    out.append(Binary(op, Var(a), Var(b)))
    out.extend(Var(b) for b in bools)
    out.extend(Unary("!", Var(b)) for b in bools)
    out.extend(Binary("==", Len(Var(a)), IntLit(0)) for a in arrays)
    out.extend(Binary("<", Var(v), IntLit(0)) for v in ints)
    out.extend(Binary(">=", Var(v), Len(Var(a))) for v in ints for a in arrays)
    seen = set()
    unique = []
    for t in out:
        if t not in seen:
            seen.add(t)
            unique.append(t)
    return unique


def _ingredients(program: Program) -> list:
    seen = set()
    out = []
    for s in program.statements():
        bare = strip_meta(s)
        if bare not in seen:
            seen.add(bare)
            out.append(s)
    return out


def statement_mutations(
    program: Program,
    target: NodeId,
    templates: Optional[list] = None,
) -> Iterator[MutationOperator]:
    """Operators for one statement, in the fixed kind order.

    Candidates are not type-checked here; :func:`apply_mutation` rejects the
    ill-typed ones.
    """
    nodes = program.node_index()
    s = nodes.get(target)
    if s is None:
        return
    fn = program.function(target.fn)
    scope = scope_at(program, target)
    consts = function_constants(fn)
    if templates is None:
        templates = guard_templates(scope, consts)
    sites = list(expr_sites(s))

    def mk(kind, params, *stmts):
        return MutationOperator(kind, target, tuple(params), tuple(stmts))

    for kinds_ops, kind in ((REL_OPS, "ReplaceRelOp"), (ARITH_OPS, "ReplaceArithOp")):
        for path, e in sites:
            if isinstance(e, Binary) and e.op in kinds_ops:
                for op in kinds_ops:
                    if op != e.op:
                        new = replace_at(s, path, Binary(op, e.left, e.right))
                        yield mk(kind, (e.op, op), new)

    guarded = isinstance(s, (If, While))
    if guarded:
        c = s.cond
        negated = c.operand if isinstance(c, Unary) and c.op == "!" else Unary("!", c)
        yield mk("NegateCondition", (format_expr(negated),), replace_at(s, (("cond", None),), negated))
        for kind, op in (("GuardConjoin", "&&"), ("GuardDisjoin", "||")):
            for t in templates:
                cond = Binary(op, c, t)
                yield mk(kind, (format_expr(t),), replace_at(s, (("cond", None),), cond))

    for path, e in sites:
        if isinstance(e, IntLit):
            for v in consts:
                if v != e.value:
                    yield mk("ReplaceConstant", (e.value, v), replace_at(s, path, IntLit(v)))
        elif isinstance(e, BoolLit):
            yield mk("ReplaceConstant", (e.value, not e.value), replace_at(s, path, BoolLit(not e.value)))

    for path, e in sites:
        if isinstance(e, Var):
            for name, ty in scope.items():
                if name != e.name and ty == scope.get(e.name):
                    yield mk("ReplaceVariable", (e.name, name), replace_at(s, path, Var(name)))

    for t in templates:
        g = If(t, (Abort(GUARD_MESSAGE),))
        yield mk("InsertGuardAbort", (format_expr(t),), g, s)
    if fn.ret != UNIT:
        for t in templates:
            for d in default_values(fn.ret):
                g = If(t, (Return(d),))
                yield mk("InsertGuardReturn", (format_expr(t), format_expr(d)), g, s)

    yield mk("DeleteStatement", ())

    for ing in _ingredients(program):
        if ing.nid == s.nid or strip_meta(ing) == strip_meta(s):
            continue
        if isinstance(s, Let) != isinstance(ing, Let):
            continue
        yield mk("ReplaceWithIngredient", (str(ing.nid), format_stmt(ing).splitlines()[0]), strip_meta(ing))


def enumerate_mutations(program: Program, ranking, top_k: int) -> Iterator[tuple[int, MutationOperator]]:
    """(ranking position, operator) for the top_k ranked statements in order."""
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    for pos, entry in enumerate(ranking[:top_k]):
        for op in statement_mutations(program, entry.node):
            yield pos, op
