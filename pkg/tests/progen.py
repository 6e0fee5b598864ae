"""Seeded generator of random well-typed MiniLang programs for property tests."""

from __future__ import annotations

import random

from mlrepair.minilang import Program, parse

INT, BOOL, ARR = "int", "bool", "int[]"


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.fns: list[tuple[str, list[str], str]] = []  # name, param types, return type
        self.fresh = 0

    def name(self, prefix: str) -> str:
        self.fresh += 1
        return f"{prefix}{self.fresh}"

    # -- expressions --

    def expr(self, ty: str, scope: dict, depth: int) -> str:
        r = self.rng
        vars_ = [v for v, t in scope.items() if t == ty]
        if ty == INT:
            leaf = [lambda: str(r.randint(-3, 9))]
            if vars_:
                leaf.append(lambda: r.choice(vars_))
            if depth <= 0:
                return r.choice(leaf)()
            arrs = [v for v, t in scope.items() if t == ARR]
            opts = leaf + [
                lambda: f"{self.expr(INT, scope, depth - 1)} {r.choice('+-*/%')} {self.expr(INT, scope, depth - 1)}",
                lambda: f"-{self.atom(INT, scope, depth - 1)}",
            ]
            if arrs:
                opts.append(lambda: f"len({r.choice(arrs)})")
                opts.append(lambda: f"{r.choice(arrs)}[{self.expr(INT, scope, depth - 1)}]")
            call = self.call(INT, scope, depth)
            if call:
                opts.append(lambda: call)
            return r.choice(opts)()
        if ty == BOOL:
            leaf = [lambda: r.choice(["true", "false"])]
            if vars_:
                leaf.append(lambda: r.choice(vars_))
            if depth <= 0:
                return r.choice(leaf)()
            opts = leaf + [
                lambda: f"{self.expr(INT, scope, depth - 1)} {r.choice(['<', '<=', '>', '>=', '==', '!='])} {self.expr(INT, scope, depth - 1)}",
                lambda: f"!{self.atom(BOOL, scope, depth - 1)}",
                lambda: f"{self.atom(BOOL, scope, depth - 1)} {r.choice(['&&', '||'])} {self.atom(BOOL, scope, depth - 1)}",
            ]
            call = self.call(BOOL, scope, depth)
            if call:
                opts.append(lambda: call)
            return r.choice(opts)()
        # arrays
        opts = [lambda: "[" + ", ".join(self.expr(INT, scope, 0) for _ in range(r.randint(0, 3))) + "]"]
        if vars_:
            opts += [lambda: r.choice(vars_)] * 2
        return r.choice(opts)()

    def atom(self, ty: str, scope: dict, depth: int) -> str:
        e = self.expr(ty, scope, depth)
        return f"({e})" if " " in e else e

    def call(self, ty: str, scope: dict, depth: int):
        cands = [f for f in self.fns if f[2] == ty]
        if not cands or depth < 1:
            return None
        name, params, _ = self.rng.choice(cands)
        return f"{name}(" + ", ".join(self.expr(t, scope, depth - 1) for t in params) + ")"

    # -- statements --

    def block(self, scope: dict, ret: str, depth: int, indent: str, n: int) -> list[str]:
        scope = dict(scope)
        out = []
        for _ in range(n):
            out.extend(self.stmt(scope, ret, depth, indent))
        return out

    def stmt(self, scope: dict, ret: str, depth: int, ind: str) -> list[str]:
        r = self.rng
        kind = r.choices(
            ["let", "assign", "set", "if", "while", "return", "abort"],
            weights=[5, 4, 1, 3 if depth > 0 else 0, 2 if depth > 0 else 0, 1, 1],
        )[0]
        mutable = [v for v in scope if not v.startswith("k")]
        if kind == "assign" and not mutable:
            kind = "let"
        arrs = [v for v, t in scope.items() if t == ARR]
        if kind == "set" and not arrs:
            kind = "let"
        if kind == "let":
            ty = r.choice([INT, INT, BOOL, ARR])
            v = self.name("v")
            line = f"{ind}let {v}: {ty} = {self.expr(ty, scope, 2)};"
            scope[v] = ty
            return [line]
        if kind == "assign":
            v = r.choice(mutable)
            return [f"{ind}{v} = {self.expr(scope[v], scope, 2)};"]
        if kind == "set":
            a = r.choice(arrs)
            return [f"{ind}{a}[{self.expr(INT, scope, 1)}] = {self.expr(INT, scope, 2)};"]
        if kind == "if":
            lines = [f"{ind}if ({self.expr(BOOL, scope, 2)}) {{"]
            lines += self.block(scope, ret, depth - 1, ind + "  ", r.randint(1, 3))
            if r.random() < 0.5:
                lines.append(f"{ind}}} else {{")
                lines += self.block(scope, ret, depth - 1, ind + "  ", r.randint(1, 2))
            lines.append(f"{ind}}}")
            return lines
        if kind == "while":
            k = self.name("k")
            inner = dict(scope)
            inner[k] = INT
            lines = [f"{ind}let {k}: int = 0;", f"{ind}while ({k} < {r.randint(1, 4)}) {{"]
            lines += self.block(inner, ret, depth - 1, ind + "  ", r.randint(1, 2))
            lines.append(f"{ind}  {k} = {k} + 1;")
            lines.append(f"{ind}}}")
            scope[k] = INT
            return lines
        if kind == "return":
            return [f"{ind}return {self.expr(ret, scope, 2)};"]
        return [f'{ind}abort("{r.choice(["bad", "oops", "guard"])}");']

    def function(self) -> str:
        r = self.rng
        name = self.name("f")
        params = [r.choice([INT, INT, BOOL, ARR]) for _ in range(r.randint(0, 3))]
        ret = r.choice([INT, INT, BOOL])
        scope = {f"p{i}": t for i, t in enumerate(params)}
        head = f"fn {name}(" + ", ".join(f"p{i}: {t}" for i, t in enumerate(params)) + f") -> {ret} {{"
        body = self.block(scope, ret, 2, "  ", r.randint(1, 5))
        body.append(f"  return {self.expr(ret, scope, 1)};")
        self.fns.append((name, params, ret))
        return "\n".join([head, *body, "}"])


def random_source(seed: int) -> str:
    g = _Gen(random.Random(seed))
    return "\n\n".join(g.function() for _ in range(g.rng.randint(1, 3))) + "\n"


def random_program(seed: int) -> Program:
    return parse(random_source(seed))


def random_args(program: Program, fn: str, rng: random.Random) -> tuple:
    out = []
    for p in program.function(fn).params:
        if p.type == INT:
            out.append(rng.randint(-5, 5))
        elif p.type == BOOL:
            out.append(rng.random() < 0.5)
        else:
            out.append(tuple(rng.randint(-3, 3) for _ in range(rng.randint(0, 4))))
    return tuple(out)


def mutate(program: Program, rng: random.Random, edits: int) -> Program:
    """Apply up to ``edits`` random well-typed repair mutations."""
    from mlrepair.minilang import pretty_print
    from mlrepair.repair import apply_mutation, statement_mutations

    for _ in range(edits):
        stmts = list(program.statements())
        for _attempt in range(10):
            target = rng.choice(stmts).nid
            ops = list(statement_mutations(program, target))
            if not ops:
                continue
            out = apply_mutation(program, rng.choice(ops))
            if out is not None:
                program = parse(pretty_print(out))
                break
    return program


def transform(program: Program, rename, relit) -> Program:
    """Rewrite every identifier with ``rename`` and every integer literal with
    ``relit``; the result is re-parsed so node ids and lines are canonical."""
    import dataclasses

    from mlrepair.minilang import pretty_print
    from mlrepair.minilang.ast import IntLit, Node, Param

    def walk(x):
        if isinstance(x, Param):
            return Param(rename(x.name), x.type)
        if isinstance(x, tuple):
            return tuple(walk(y) for y in x)
        if not isinstance(x, Node):
            return x
        changes = {}
        for f in dataclasses.fields(x):
            if f.name in ("nid", "line", "origin"):
                continue
            v = getattr(x, f.name)
            if f.name == "name" and isinstance(v, str):
                changes["name"] = rename(v)
            elif isinstance(x, IntLit) and f.name == "value":
                changes["value"] = relit(v)
            elif isinstance(v, (tuple, Node)):
                changes[f.name] = walk(v)
        return dataclasses.replace(x, **changes)

    return parse(pretty_print(Program(tuple(walk(fn) for fn in program.functions))))


def identifiers(*programs: Program) -> list[str]:
    from mlrepair.minilang.ast import Call, Index, Let, Assign, SetIndex, Var

    names = set()
    for p in programs:
        for fn in p.functions:
            names.add(fn.name)
            names.update(prm.name for prm in fn.params)
        for node in p.nodes():
            if isinstance(node, (Var, Index, Call, Let, Assign, SetIndex)):
                names.add(node.name)
    return sorted(names)


def random_renaming(rng: random.Random, *programs: Program):
    """A consistent injective renaming and literal map for ``programs``."""
    names = identifiers(*programs)
    fresh = [f"n{i}" for i in range(len(names))]
    rng.shuffle(fresh)
    table = dict(zip(names, fresh))
    scale = rng.randint(2, 5)
    shift = rng.randint(1, 9)

    def relit(v: int) -> int:
        # injective and sign-preserving
        return v * scale + shift if v >= 0 else v * scale - shift

    return table.__getitem__, relit
