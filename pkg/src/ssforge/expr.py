"""Holomorphic expressions in one complex variable ``z``.

Grammar, lowest to highest precedence::

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' unary)?          # right-associative
    atom     := NUMBER | 'i' | 'z' | '(' expr ')' | NAME '(' expr ')'

``NAME`` is one of exp, log, sin, cos.  Numbers are decimal with optional
fraction and exponent.  Whitespace is ignored; implicit multiplication
(``2z``) is rejected.  Arithmetic between constants is folded while parsing,
so ``(1+2*i)`` becomes the single constant 1+2i.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import jet as J
from .jet import Jet2, JetDomainError

FUNCTIONS = ("exp", "log", "sin", "cos")


class ParseError(ValueError):
    def __init__(self, message: str, position: int, source: str = ""):
        super().__init__(f"{message} (at position {position})")
        self.message = message
        self.position = position
        self.source = source


@dataclass(frozen=True)
class Const:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


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


Node = Union[Const, Var, Neg, BinOp, Call]


# -- constructors with constant folding --------------------------------------

def neg(x: Node) -> Node:
    if isinstance(x, Const):
        return Const(-x.value)
    return Neg(x)


def binop(op: str, left: Node, right: Node) -> Node:
    if isinstance(left, Const) and isinstance(right, Const) and op != "^":
        a, b = left.value, right.value
        if op == "+":
            return Const(a + b)
        if op == "-":
            return Const(a - b)
        if op == "*":
            return Const(a * b)
        if op == "/" and b != 0:
            return Const(a / b)
    return BinOp(op, left, right)


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    n = len(src)
    while pos < n:
        if src[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, pos: int | None = None):
        if pos is None:
            pos = self.peek()[2]
        return ParseError(message, min(pos, len(self.src)), self.src)

    def parse(self) -> Node:
        if self.peek()[0] == "end":
            raise self.error("empty expression", 0)
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            if text == ")":
                raise self.error("unbalanced ')'")
            raise self.error(f"unexpected {text!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = binop(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.advance()[1]
            node = binop(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.advance()
            return neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.advance()
            return binop("^", base, self.unary())
        return base

    def atom(self) -> Node:
        kind, text, pos = self.advance()
        if kind == "num":
            return Const(complex(float(text)))
        if kind == "name":
            if text == "z":
                return Var()
            if text == "i":
                return Const(1j)
            if text in FUNCTIONS:
                if self.peek()[1] != "(":
                    raise self.error(f"expected '(' after {text}")
                open_pos = self.advance()[2]
                arg = self.expr()
                if self.peek()[1] != ")":
                    raise self.error("unbalanced '('", open_pos)
                self.advance()
                return Call(text, arg)
            raise self.error(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            inner = self.expr()
            if self.peek()[1] != ")":
                raise self.error("unbalanced '('", pos)
            self.advance()
            return inner
        if kind == "end":
            raise self.error("unexpected end of input", pos)
        if text == ")":
            raise self.error("unbalanced ')'", pos)
        raise self.error(f"unexpected {text!r}", pos)


def parse(src: str) -> Node:
    """Parse ``src`` into an AST; raises :class:`ParseError` with a position."""
    return _Parser(src).parse()


# -- printing ----------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _fmt_real(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _const_text(c: complex) -> tuple[str, int]:
    re_, im = c.real, c.imag
    if im == 0:
        return (_fmt_real(re_), 5) if re_ >= 0 else ("-" + _fmt_real(-re_), 3)
    imag = "i" if abs(im) == 1 else _fmt_real(abs(im)) + "*i"
    if re_ == 0:
        if im > 0:
            return imag, 5 if imag == "i" else 2
        return "-" + imag, 3 if imag == "i" else 2
    sign = " + " if im > 0 else " - "
    return _fmt_real(re_) + sign + imag, 1


def _show(node: Node) -> tuple[str, int]:
    if isinstance(node, Var):
        return "z", 5
    if isinstance(node, Const):
        return _const_text(node.value)
    if isinstance(node, Call):
        return f"{node.name}({to_source(node.arg)})", 5
    if isinstance(node, Neg):
        return "-" + _wrap(node.operand, 3), 3
    p = _PREC[node.op]
    if node.op == "^":
        return f"{_wrap(node.left, 5)}^{_wrap(node.right, 3)}", 4
    sep = f" {node.op} " if p == 1 else node.op
    return _wrap(node.left, p) + sep + _wrap(node.right, p + 1), p


def _wrap(node: Node, min_prec: int) -> str:
    text, prec = _show(node)
    return f"({text})" if prec < min_prec else text


def to_source(node: Node) -> str:
    """Render an AST back to parseable text with minimal parentheses."""
    return _show(node)[0]


# -- evaluation --------------------------------------------------------------

_UNARY = {"exp": J.jet_exp, "sin": J.jet_sin, "cos": J.jet_cos}


def _integer_exponent(node: Node) -> int | None:
    if isinstance(node, Const) and node.value.imag == 0:
        x = node.value.real
        if x == int(x) and abs(x) <= 1024:
            return int(x)
    return None


def eval_jet(node: Node, z) -> Jet2:
    """Jet (value, d/dz, d^2/dz^2) of ``node`` at ``z`` (scalar or complex array)."""
    if isinstance(node, str):
        node = parse(node)
    zv = np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)
    return _eval(node, zv)


def _eval(node: Node, z) -> Jet2:
    if isinstance(node, Var):
        return Jet2.variable(z)
    if isinstance(node, Const):
        if isinstance(z, np.ndarray):
            return Jet2.constant(np.full(z.shape, node.value, dtype=complex))
        return Jet2.constant(node.value)
    try:
        if isinstance(node, Neg):
            return -_eval(node.operand, z)
        if isinstance(node, Call):
            arg = _eval(node.arg, z)
            if node.name == "log":
                return J.jet_log(arg, at=z)
            return _UNARY[node.name](arg)
        left = _eval(node.left, z)
        if node.op == "^":
            n = _integer_exponent(node.right)
            if n is not None:
                return J.jet_pow_int(left, n, at=z)
            return J.jet_pow(left, _eval(node.right, z), at=z)
        right = _eval(node.right, z)
        if node.op == "+":
            return J.jet_add(left, right)
        if node.op == "-":
            return J.jet_sub(left, right)
        if node.op == "*":
            return J.jet_mul(left, right)
        return J.jet_div(left, right, at=z)
    except JetDomainError as exc:
        if getattr(exc, "subexpr", None) is None:
            exc.subexpr = to_source(node)
            exc.args = (f"{exc.args[0]} in {exc.subexpr!r}",)
        raise
