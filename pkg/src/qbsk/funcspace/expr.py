"""Recursive-descent parser for real functions of one variable ``t``.

Grammar (whitespace is insignificant)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | power
    power  := atom ("^" unary)?          # right associative, binds tighter than unary minus
    atom   := NUMBER | "t" | "pi" | "e" | FUNC "(" expr ")" | "(" expr ")"
    FUNC   := sin | cos | exp | log | sqrt | abs

So ``-t^2`` is ``-(t^2)`` and ``2^3^2`` is ``2^(3^2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import EvalError, ParseError

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "abs")
CONSTANTS = {"pi": math.pi, "e": math.e}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Num, Var, Const, Neg, BinOp, Call]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(src):
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ParseError(pos + 1, "a number, name or operator", src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start + 1))
        pos = m.end()
    tokens.append(("end", "", len(src) + 1))
    return tokens


class _Parser:
    def __init__(self, src):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, col = self.peek()
        if kind != "op" or text != op:
            raise ParseError(col, repr(op), self.src)
        self.advance()

    def parse(self):
        node = self.expr()
        kind, text, col = self.peek()
        if kind != "end":
            raise ParseError(col, "an operator or end of input", self.src)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.advance()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, text, col = self.advance()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text == "t":
                return Var()
            if text in CONSTANTS:
                return Const(text)
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            raise ParseError(col, "t, pi, e or one of " + ", ".join(FUNCTIONS), self.src)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(col, "an operand", self.src)


def parse_expr(src: str) -> Node:
    if not src or not src.strip():
        raise ParseError(1, "an expression", src or "")
    return _Parser(src).parse()


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def unparse(node: Node) -> str:
    """Render ``node`` back to source; ``parse_expr(unparse(n)) == n``."""
    return _unparse(node, 0)


def _unparse(node, ctx_prec):
    if isinstance(node, Num):
        text = repr(node.value)
        return text
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Call):
        return f"{node.name}({_unparse(node.arg, 0)})"
    if isinstance(node, Neg):
        text = "-" + _unparse(node.operand, 3)
        return f"({text})" if ctx_prec > 3 else text
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        if node.op == "^":
            left = _unparse(node.left, p + 1)   # base must be an atom
            right = _unparse(node.right, 3)
        else:
            left = _unparse(node.left, p)
            right = _unparse(node.right, p + 1)
        text = f"{left} {node.op} {right}" if node.op != "^" else f"{left}^{right}"
        return f"({text})" if p < ctx_prec else text
    raise TypeError(f"not an expression node: {node!r}")


def _check(cond, msg):
    if np.any(cond):
        raise EvalError(msg)


def evaluate(node: Node, t):
    """Evaluate the AST at scalar or array ``t`` (numpy semantics)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.operand, t)
    if isinstance(node, Call):
        x = np.asarray(evaluate(node.arg, t), dtype=float)
        if node.name == "log":
            _check(x <= 0, "log of a nonpositive argument")
        elif node.name == "sqrt":
            _check(x < 0, "sqrt of a negative argument")
        fn = {"sin": np.sin, "cos": np.cos, "exp": np.exp, "log": np.log,
              "sqrt": np.sqrt, "abs": np.abs}[node.name]
        out = fn(x)
        return out if out.ndim else float(out)
    if isinstance(node, BinOp):
        a = evaluate(node.left, t)
        b = evaluate(node.right, t)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            _check(np.asarray(b) == 0, "division by zero")
            return np.divide(a, b)
        with np.errstate(invalid="ignore"):
            out = np.power(np.asarray(a, dtype=float), b)
        _check(np.isnan(out) & ~np.isnan(np.asarray(a, dtype=float)),
               "power of a negative base with a fractional exponent")
        return out if np.ndim(out) else float(out)
    raise TypeError(f"not an expression node: {node!r}")


def contains_call(node: Node, names) -> bool:
    if isinstance(node, Call):
        return node.name in names or contains_call(node.arg, names)
    if isinstance(node, Neg):
        return contains_call(node.operand, names)
    if isinstance(node, BinOp):
        return contains_call(node.left, names) or contains_call(node.right, names)
    return False
