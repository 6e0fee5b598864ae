"""Statement-level AST diff and patch application."""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass
from typing import Optional

from ..minilang.ast import FunctionDef, If, Program, While, child_blocks
from ..minilang.printer import format_expr, format_stmt, layout, pretty_print

INSERT = "Insert"
DELETE = "Delete"
REPLACE = "Replace"
UPDATE = "Update"
ACTIONS = (INSERT, DELETE, REPLACE, UPDATE)


class FingerprintMismatch(Exception):
    """The patch was made against a different base program."""


def fingerprint(p: Program) -> str:
    return hashlib.sha256(pretty_print(p).encode()).hexdigest()


@dataclass(frozen=True)
class Chunk:
    """One contiguous edit.

    Statement-level chunks address a block by ``path`` (pairs of statement
    index and branch, 0 = then/body, 1 = else, from the function body down)
    and cover base statements ``[start, end)``. ``Update`` rewrites only the
    guard of the compound statement at ``start``. Function-level chunks have
    ``path=None`` and ``start`` is a position in the function list.
    """

    fn: str
    path: Optional[tuple]
    start: int
    end: int
    action: str
    removed: tuple
    added: tuple
    line_span: tuple = (0, 0)

    def __post_init__(self):
        if self.action == INSERT and self.removed:
            raise ValueError("Insert chunk with removed fragment")
        if self.action == DELETE and self.added:
            raise ValueError("Delete chunk with added fragment")

    @property
    def function_level(self) -> bool:
        return self.path is None

    def sort_key(self) -> tuple:
        return (self.fn, self.line_span[0], self.path or (), self.start)

    def fragment_src(self, frag: tuple) -> str:
        parts = []
        for node in frag:
            if isinstance(node, FunctionDef):
                parts.append(pretty_print(Program((node,))).rstrip("\n"))
            elif self.action == UPDATE:
                parts.append(format_expr(node))
            else:
                parts.append(format_stmt(node))
        return "\n".join(parts)

    def to_json(self) -> dict:
        return {
            "fn": self.fn,
            "line_span": list(self.line_span),
            "action": self.action,
            "removed_src": self.fragment_src(self.removed),
            "added_src": self.fragment_src(self.added),
        }


@dataclass(frozen=True)
class Patch:
    base_fingerprint: str
    chunks: tuple

    def __len__(self) -> int:
        return len(self.chunks)

    def to_json(self) -> dict:
        return {"base_fingerprint": self.base_fingerprint, "chunks": [c.to_json() for c in self.chunks]}


# -- diff ---------------------------------------------------------------------


def _lcs_pairs(a: tuple, b: tuple) -> list[tuple[int, int]]:
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                table[i][j] = table[i + 1][j + 1] + 1
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    pairs = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def _last_line(s) -> int:
    """Line of the last text row a statement occupies (its closing brace)."""
    blocks = child_blocks(s)
    if not blocks:
        return s.line
    last = s.line
    for i, blk in enumerate(blocks):
        end = max((_last_line(x) for x in blk), default=last) + 1
        last = end
    return last


def _insert_line(block: tuple, idx: int, header_line: int) -> int:
    if idx < len(block):
        return block[idx].line
    if block:
        return _last_line(block[-1]) + 1
    return header_line + 1


def _function_span(f: FunctionDef) -> tuple:
    end = max((_last_line(x) for x in f.body), default=f.line) + 1
    return (f.line, end)


def _function_insert_line(base: Program, target: Program, pos: int) -> int:
    """Base line before which a function inserted at target ``pos`` lands."""
    base_fns = {f.name: f for f in base.functions}
    for g in target.functions[pos + 1:]:
        if g.name in base_fns:
            return base_fns[g.name].line
    if not base.functions:
        return 1
    return _function_span(base.functions[-1])[1] + 1


def _pairable(x, y) -> bool:
    if isinstance(x, If) and isinstance(y, If):
        return (x.orelse is None) == (y.orelse is None)
    return isinstance(x, While) and isinstance(y, While)


def _diff_block(fn: str, path: tuple, a: tuple, b: tuple, header_line: int, out: list) -> None:
    anchors = _lcs_pairs(a, b) + [(len(a), len(b))]
    i = j = 0
    for ai, bj in anchors:
        removed, added = a[i:ai], b[j:bj]
        if removed or added:
            _diff_region(fn, path, i, removed, added, a, header_line, out)
        i, j = ai + 1, bj + 1


def _diff_region(fn, path, start, removed, added, block, header_line, out) -> None:
    if removed and len(removed) == len(added) and all(_pairable(x, y) for x, y in zip(removed, added)):
        for k, (x, y) in enumerate(zip(removed, added)):
            idx = start + k
            if x.cond != y.cond:
                out.append(Chunk(fn, path, idx, idx + 1, UPDATE, (x.cond,), (y.cond,), (x.line, x.line)))
            for br, (xb, yb) in enumerate(zip(child_blocks(x), child_blocks(y))):
                _diff_block(fn, path + (idx, br), xb, yb, x.line, out)
        return
    if not removed:
        line = _insert_line(block, start, header_line)
        out.append(Chunk(fn, path, start, start, INSERT, (), tuple(added), (line, line)))
        return
    span = (removed[0].line, _last_line(removed[-1]))
    action = REPLACE if added else DELETE
    out.append(Chunk(fn, path, start, start + len(removed), action, tuple(removed), tuple(added), span))


def ast_diff(base: Program, target: Program) -> Patch:
    """Minimal statement-level edit script turning ``base`` into ``target``."""
    chunks: list[Chunk] = []
    target_names = set(target.function_names())
    base_fns = {f.name: f for f in base.functions}
    for pos, f in enumerate(base.functions):
        if f.name not in target_names:
            chunks.append(Chunk(f.name, None, pos, pos + 1, DELETE, (f,), (), _function_span(f)))
    for pos, g in enumerate(target.functions):
        f = base_fns.get(g.name)
        if f is None:
            line = _function_insert_line(base, target, pos)
            chunks.append(Chunk(g.name, None, pos, pos, INSERT, (), (g,), (line, line)))
        elif f.params != g.params or f.ret != g.ret:
            chunks.append(Chunk(g.name, None, pos, pos + 1, REPLACE, (f,), (g,), _function_span(f)))
        else:
            _diff_block(f.name, (), f.body, g.body, f.line, chunks)
    chunks.sort(key=Chunk.sort_key)
    return Patch(fingerprint(base), tuple(chunks))


# -- apply --------------------------------------------------------------------


def _apply_block(block: tuple, path: tuple, chunks: list) -> tuple:
    here = [c for c in chunks if c.path == path]
    nested = [c for c in chunks if len(c.path) > len(path) and c.path[: len(path)] == path]
    if not here and not nested:
        return block
    inserts: dict[int, list] = {}
    spans: dict[int, Chunk] = {}
    updates: dict[int, Chunk] = {}
    for c in here:
        if c.action == INSERT:
            inserts.setdefault(c.start, []).append(c)
        elif c.action == UPDATE:
            updates[c.start] = c
        else:
            spans[c.start] = c
    out: list = []
    i = 0
    while i <= len(block):
        for c in inserts.get(i, []):
            out.extend(c.added)
        if i == len(block):
            break
        if i in spans:
            c = spans[i]
            out.extend(c.added)
            i = c.end
            continue
        s = block[i]
        changes = {}
        if i in updates:
            changes["cond"] = updates[i].added[0]
        if isinstance(s, If):
            changes["then"] = _apply_block(s.then, path + (i, 0), nested)
            if s.orelse is not None:
                changes["orelse"] = _apply_block(s.orelse, path + (i, 1), nested)
        elif isinstance(s, While):
            changes["body"] = _apply_block(s.body, path + (i, 0), nested)
        out.append(dataclasses.replace(s, **changes) if changes else s)
        i += 1
    return tuple(out)


def apply_patch(base: Program, patch: Patch, check: bool = True) -> Program:
    """Apply ``patch`` to the program it was computed against."""
    if check and fingerprint(base) != patch.base_fingerprint:
        raise FingerprintMismatch("patch does not match the base program")
    fn_chunks = [c for c in patch.chunks if c.function_level]
    removed = {c.fn for c in fn_chunks if c.action == DELETE}
    replaced = {c.fn: c.added[0] for c in fn_chunks if c.action == REPLACE}
    functions = []
    for f in base.functions:
        if f.name in removed:
            continue
        f = replaced.get(f.name, f)
        stmt_chunks = [c for c in patch.chunks if not c.function_level and c.fn == f.name]
        if stmt_chunks:
            f = dataclasses.replace(f, body=_apply_block(f.body, (), stmt_chunks))
        functions.append(f)
    for c in sorted((c for c in fn_chunks if c.action == INSERT), key=lambda c: c.start):
        functions.insert(c.start, c.added[0])
    return layout(Program(tuple(functions)))[1]
