"""Recursive-descent parser for the expression grammar.

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' atom)? | '-' factor
    atom   := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'

Unknown functions use derivative suffixes: ``f_zw``, ``u_xy``, ``g''``.  A bare
``f`` or ``g`` is the underived unknown on its default arguments; a bare ``u``
is the coordinate variable, and ``u(x, y, t)`` the unknown.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .expr import (
    SIGNATURES,
    Const,
    Expr,
    Num,
    Unknown,
    Var,
    add,
    div,
    func,
    mul,
    neg,
    power,
    sub,
)

VARIABLES = frozenset({"x", "y", "t", "u", "z", "w", "s"})
CONSTANTS = frozenset({"c1", "c2", "a", "b", "c", "eps", "epsp"})
FUNCTION_NAMES = frozenset({"exp", "ln", "tanh"})


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>\d+(?:\.\d*)?|\.\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(Token("eof", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


_ATOM_START = ("number", "identifier", "'('")


class _Parser:
    def __init__(self, text, variables, constants):
        self.tokens = tokenize(text)
        self.i = 0
        self.variables = variables
        self.constants = constants

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text: str):
        if self.tok.text != text or self.tok.kind != "op":
            raise ParseError(f"unexpected {self._describe()}", self.tok.offset, {repr(text)})
        return self.take()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "eof" else f"token {self.tok.text!r}"

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            raise ParseError(f"unexpected {self._describe()}", self.tok.offset, {"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.take().text
            rhs = self.term()
            e = add(e, rhs) if op == "+" else sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.take().text
            rhs = self.factor()
            e = mul(e, rhs) if op == "*" else div(e, rhs)
        return e

    def factor(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.take()
            return neg(self.factor())
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.take()
            return power(base, self.atom())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.take()
            return Num(Fraction(t.text))
        if t.kind == "op" and t.text == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            self.take()
            if self.tok.kind == "op" and self.tok.text == "(":
                return self.call(t)
            return self.identifier(t)
        raise ParseError(f"unexpected {self._describe()}", t.offset, set(_ATOM_START) | {"'-'"})

    def arguments(self) -> list[Expr]:
        self.expect("(")
        args = [self.expr()]
        while self.tok.kind == "op" and self.tok.text == ",":
            self.take()
            args.append(self.expr())
        self.expect(")")
        return args

    def call(self, t: Token) -> Expr:
        name = t.text
        if name in FUNCTION_NAMES:
            args = self.arguments()
            if len(args) != 1:
                raise ParseError(f"{name} takes one argument", t.offset)
            return func(name, args[0])
        unk = (name, (0,) * len(SIGNATURES[name])) if name in SIGNATURES else _unknown_head(name)
        if unk is None:
            raise ParseError(f"unknown function name {name!r}", t.offset, set(FUNCTION_NAMES) | set(SIGNATURES))
        fname, derivs = unk
        args = self.arguments()
        if len(args) != len(SIGNATURES[fname]):
            raise ParseError(f"{fname} takes {len(SIGNATURES[fname])} arguments", t.offset)
        return Unknown(fname, args, derivs)

    def identifier(self, t: Token) -> Expr:
        name = t.text
        if name in self.variables:
            return Var(name)
        if name in self.constants:
            return Const(name)
        unk = _unknown_head(name)
        if unk is not None:
            fname, derivs = unk
            return Unknown(fname, None, derivs)
        if name in FUNCTION_NAMES:
            raise ParseError(f"function {name!r} needs an argument list", t.offset, {"'('"})
        raise ParseError(f"unknown identifier {name!r}", t.offset)


def _unknown_head(name: str):
    """Split ``f_zw`` / ``g''`` into (function, multi-index); ``None`` if not an unknown."""
    if name.endswith("'"):
        base = name.rstrip("'")
        sig = SIGNATURES.get(base)
        if sig is None or len(sig) != 1:
            return None
        return base, (len(name) - len(base),)
    head, _, suffix = name.partition("_")
    sig = SIGNATURES.get(head)
    if sig is None:
        return None
    if not suffix:
        return (head, (0,) * len(sig)) if head != "u" else None
    if any(ch not in sig for ch in suffix):
        return None
    return head, tuple(suffix.count(v) for v in sig)


def parse(text: str, variables=(), constants=()) -> Expr:
    """Parse ``text`` into a normalised expression.

    ``variables`` and ``constants`` extend the default identifier sets, e.g.
    with ``d_x`` for vector-field text or ``X1``..``X6`` for Lie elements.
    """
    p = _Parser(text, VARIABLES | frozenset(variables), CONSTANTS | frozenset(constants))
    return p.parse()
