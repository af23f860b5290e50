"""Parser and evaluator for density expressions in one variable ``x``.

Grammar, lowest precedence first::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('-' | '+') unary | power
    power   := primary (('^' | '**') unary)?      # right associative
    primary := NUMBER | 'x' | CONST | FUNC '(' expr ')' | '(' expr ')'

so ``-2^2 == -4`` and ``2^3^2 == 512``. Evaluation is vectorized over numpy
arrays.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import special

from .errors import ExpressionSyntaxError, UnknownIdentifier

FUNCTIONS: dict[str, Callable] = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "erf": special.erf,
}
CONSTANTS = {"pi": np.pi, "e": np.e}
_BINARY = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power}
_NAMES = {"+": "Add", "-": "Sub", "*": "Mul", "/": "Div", "^": "Pow"}


@dataclass(frozen=True)
class Num:
    value: float

    def __str__(self):
        return str(int(self.value)) if self.value.is_integer() else repr(self.value)


@dataclass(frozen=True)
class Var:
    def __str__(self):
        return "x"


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    operand: "Node"

    def __str__(self):
        return f"Neg({self.operand})"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def __str__(self):
        return f"{_NAMES[self.op]}({self.left}, {self.right})"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"

    def __str__(self):
        return f"{self.func.capitalize()}({self.arg})"


Node = Union[Num, Var, Const, Neg, BinOp, Call]

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def accept(self, *ops: str) -> _Tok | None:
        t = self.tok
        if t.kind == "op" and t.text in ops:
            self.i += 1
            return t
        return None

    def expect(self, op: str) -> None:
        if not self.accept(op):
            self.fail([repr(op)])

    def fail(self, expected):
        t = self.tok
        what = "end of input" if t.kind == "end" else repr(t.text)
        raise ExpressionSyntaxError(f"unexpected {what}", t.pos, expected)

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self.fail(["operator", "end of input"])
        return node

    def expr(self) -> Node:
        node = self.term()
        while t := self.accept("+", "-"):
            node = BinOp(t.text, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while t := self.accept("*", "/"):
            node = BinOp(t.text, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.accept("^", "**"):
            return BinOp("^", base, self.unary())
        return base

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.i += 1
            return Num(float(t.text))
        if t.kind == "name":
            self.i += 1
            if t.text == "x":
                return Var()
            if t.text in CONSTANTS:
                return Const(t.text)
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            raise UnknownIdentifier(f"unknown identifier {t.text!r}", t.pos,
                                    ["x", *CONSTANTS, *(f + "(" for f in FUNCTIONS)])
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        self.fail(["number", "x", "constant", "function", "'('"])


def parse_expression(text: str) -> Node:
    return _Parser(text).parse()


def evaluate(node: Node, x):
    """Evaluate ``node`` at ``x`` (scalar or array). Domain errors give nan."""
    with np.errstate(all="ignore"):
        return _eval(node, x)


def _eval(node: Node, x):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return np.negative(_eval(node.operand, x))
    if isinstance(node, BinOp):
        return _BINARY[node.op](_eval(node.left, x), _eval(node.right, x))
    if isinstance(node, Call):
        return FUNCTIONS[node.func](_eval(node.arg, x))
    raise TypeError(f"not an expression node: {node!r}")


def compile_expression(text: str) -> Callable:
    """Parse ``text`` once and return a vectorized ``f(x)``."""
    node = parse_expression(text)

    def f(x):
        return np.asarray(evaluate(node, np.asarray(x, dtype=np.float64)), dtype=np.float64)

    f.ast = node
    f.source = text
    return f
