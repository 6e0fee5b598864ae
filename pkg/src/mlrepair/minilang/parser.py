"""Recursive-descent parser for MiniLang source text."""

from __future__ import annotations

import re
from typing import Optional

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
    Param,
    Program,
    Return,
    SetIndex,
    Unary,
    Var,
    While,
)
from .errors import ParseError
from .printer import layout
from .typecheck import check_program

KEYWORDS = {
    "fn", "let", "if", "else", "while", "return", "abort",
    "true", "false", "len", "int", "bool", "unit",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<op>->|&&|\|\||<=|>=|==|!=|[-+*/%<>=!(){}\[\];:,])
    """,
    re.VERBOSE,
)

_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unescape(literal: str) -> str:
    return re.sub(r"\\(.)", r"\1", literal[1:-1])


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0
        # source position of each node, keyed by id(), for error reporting
        self.positions: dict[int, tuple[int, int]] = {}

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "kw")

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col)

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def ident(self) -> Token:
        if self.tok.kind != "ident":
            found = self.tok.text or "end of input"
            raise self.error(f"expected identifier, found {found!r}")
        return self.advance()

    def mark(self, node, tok: Token):
        self.positions[id(node)] = (tok.line, tok.col)
        return node

    # -- grammar ---------------------------------------------------------

    def program(self) -> Program:
        fns = []
        while self.tok.kind != "eof":
            fns.append(self.fndef())
        return Program(tuple(fns))

    def type_(self, allow_unit: bool = False) -> str:
        t = self.tok
        if self.at("int"):
            self.advance()
            if self.at("["):
                self.advance()
                self.expect("]")
                return ARRAY
            return INT
        if self.at("bool"):
            self.advance()
            return BOOL
        if allow_unit and self.at("unit"):
            self.advance()
            return UNIT
        raise self.error(f"expected a type, found {t.text!r}")

    def fndef(self) -> FunctionDef:
        start = self.expect("fn")
        name = self.ident().text
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pname = self.ident()
                self.expect(":")
                params.append(Param(pname.text, self.type_()))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        self.expect("->")
        ret = self.type_(allow_unit=True)
        body = self.block()
        return self.mark(FunctionDef(name, tuple(params), ret, body), start)

    def block(self) -> tuple:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(self.stmt())
        self.expect("}")
        return tuple(stmts)

    def stmt(self):
        t = self.tok
        if self.at("let"):
            self.advance()
            name = self.ident().text
            self.expect(":")
            ty = self.type_()
            self.expect("=")
            e = self.expr()
            self.expect(";")
            return self.mark(Let(name, ty, e), t)
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            orelse = None
            if self.at("else"):
                self.advance()
                orelse = self.block()
            return self.mark(If(cond, then, orelse), t)
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return self.mark(While(cond, self.block()), t)
        if self.at("return"):
            self.advance()
            if self.at(";"):
                self.advance()
                return self.mark(Return(None), t)
            e = self.expr()
            self.expect(";")
            return self.mark(Return(e), t)
        if self.at("abort"):
            self.advance()
            self.expect("(")
            if self.tok.kind != "string":
                raise self.error("abort expects a string literal")
            msg = _unescape(self.advance().text)
            self.expect(")")
            self.expect(";")
            return self.mark(Abort(msg), t)
        e = self.expr()
        if self.at("="):
            self.advance()
            rhs = self.expr()
            self.expect(";")
            if isinstance(e, Var):
                return self.mark(Assign(e.name, rhs), t)
            if isinstance(e, Index):
                return self.mark(SetIndex(e.name, e.index, rhs), t)
            raise self.error("invalid assignment target", t)
        self.expect(";")
        return self.mark(ExprStmt(e), t)

    def expr(self, level: int = 0):
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_LEVELS[level]:
            op = self.advance()
            right = self.expr(level + 1)
            left = self.mark(Binary(op.text, left, right), op)
        return left

    def unary(self):
        t = self.tok
        if self.at("!") or self.at("-"):
            self.advance()
            if t.text == "-" and self.tok.kind == "int":
                return self.mark(IntLit(-int(self.advance().text)), t)
            return self.mark(Unary(t.text, self.unary()), t)
        return self.primary()

    def args(self) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            while True:
                out.append(self.expr())
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        return tuple(out)

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return self.mark(IntLit(int(t.text)), t)
        if self.at("true") or self.at("false"):
            self.advance()
            return self.mark(BoolLit(t.text == "true"), t)
        if self.at("len"):
            self.advance()
            args = self.args()
            if len(args) != 1:
                raise self.error("len takes exactly one argument", t)
            return self.mark(Len(args[0]), t)
        if self.at("["):
            self.advance()
            items = []
            if not self.at("]"):
                while True:
                    items.append(self.expr())
                    if not self.at(","):
                        break
                    self.advance()
            self.expect("]")
            return self.mark(ArrayLit(tuple(items)), t)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return self.mark(Call(t.text, self.args()), t)
            if self.at("["):
                self.advance()
                idx = self.expr()
                self.expect("]")
                return self.mark(Index(t.text, idx), t)
            return self.mark(Var(t.text), t)
        found = t.text or "end of input"
        raise self.error(f"unexpected {found!r}")


def parse(source: str) -> Program:
    """Parse and type-check MiniLang source; nodes are numbered canonically."""
    parser = Parser(source)
    program = parser.program()
    check_program(program, parser.positions)
    return layout(program, set_origin=True)[1]
