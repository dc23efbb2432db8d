"""Coordinate-function expressions: parser, printer and jet evaluation.

Grammar (no implicit multiplication)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' ['-'] INTEGER)?
    atom   := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Unary minus binds looser than ``^`` so ``-x^2`` is ``-(x^2)``.  Numbers may be
written as integers or decimals and are stored exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import jet as J
from .errors import EvaluationError, ParseError, UnknownIdentifierError

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


class Expr:
    """Base class of all expression nodes.  Nodes are immutable."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, p: int):
        return power(self, p)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True, repr=False)
class Const(Expr):
    value: Fraction

    def __repr__(self):
        return f"Const({self.value})"


@dataclass(frozen=True, eq=True, repr=False)
class Coord(Expr):
    name: str
    index: int

    def __repr__(self):
        return f"Coord({self.name})"


@dataclass(frozen=True, eq=True, repr=False)
class Neg(Expr):
    arg: Expr

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, eq=True, repr=False)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr

    def __repr__(self):
        return f"BinOp({self.op!r}, {self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=True, repr=False)
class Pow(Expr):
    base: Expr
    exponent: int

    def __repr__(self):
        return f"Pow({self.base!r}, {self.exponent})"


@dataclass(frozen=True, eq=True, repr=False)
class Func(Expr):
    name: str
    arg: Expr

    def __repr__(self):
        return f"Func({self.name}, {self.arg!r})"


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


# ---------------------------------------------------------------------------
# builders with light constant folding


def const(value) -> Const:
    if isinstance(value, Const):
        return value
    if isinstance(value, float):
        value = Fraction(value).limit_denominator(10**12) if value != int(value) else Fraction(int(value))
    return Const(Fraction(value))


def as_expr(x) -> Expr:
    return x if isinstance(x, Expr) else const(x)


def is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


def is_one(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 1


def add(a: Expr, b: Expr) -> Expr:
    if is_zero(a):
        return b
    if is_zero(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if isinstance(b, Neg):
        return BinOp("-", a, b.arg)
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if is_zero(b):
        return a
    if is_zero(a):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return BinOp("-", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    if is_zero(a) or is_zero(b):
        return ZERO
    if is_one(a):
        return b
    if is_one(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if is_one(b):
        return a
    if isinstance(b, Const) and b.value == 0:
        raise EvaluationError("division by zero", to_text(BinOp("/", a, b)))
    if is_zero(a):
        return ZERO
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    return BinOp("/", a, b)


def power(a: Expr, p: int) -> Expr:
    p = int(p)
    if p == 0:
        return ONE
    if p == 1:
        return a
    if isinstance(a, Const) and (a.value != 0 or p > 0):
        return Const(a.value**p)
    return Pow(a, p)


def coordinate(name: str, chart: Sequence[str]) -> Coord:
    return Coord(name, list(chart).index(name))


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: Sequence[str]):
        self.text = text
        self.chart = {name: i for i, name in enumerate(chart)}
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError(message, self.text, tok[2])

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            self.fail(f"expected {value!r}", tok)
        return tok

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            tok = self.peek()
            if tok[0] in ("num", "name") or tok[1] == "(":
                self.fail("implicit multiplication is not allowed; use '*'")
            self.fail(f"unexpected token {tok[1]!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] != "^":
            return base
        self.take()
        sign = 1
        paren = False
        if self.peek()[1] == "(":
            self.take()
            paren = True
        if self.peek()[1] == "-":
            self.take()
            sign = -1
        tok = self.take()
        if tok[0] != "num" or not re.fullmatch(r"\d+", tok[1]):
            self.fail("exponent must be an integer", tok)
        if paren:
            self.expect(")")
        if self.peek()[1] == "^":
            self.fail("chained powers are ambiguous; add parentheses")
        return Pow(base, sign * int(tok[1]))

    def atom(self) -> Expr:
        tok = self.take()
        kind, val, pos = tok
        if kind == "num":
            return Const(Fraction(val))
        if kind == "name":
            if val in FUNCTIONS:
                if self.peek()[1] != "(":
                    self.fail(f"function {val} needs an argument in parentheses")
                self.take()
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            if val not in self.chart:
                raise UnknownIdentifierError(val, self.text, pos)
            return Coord(val, self.chart[val])
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        self.fail("unexpected end of expression" if kind == "end" else f"unexpected token {val!r}", tok)


def parse(text: str, chart: Sequence[str]) -> Expr:
    """Parse ``text`` into an expression over the coordinate names ``chart``."""
    chart = list(chart)
    if len(set(chart)) != len(chart):
        raise ParseError(f"duplicate coordinate names in chart {chart}")
    for name in chart:
        if name in FUNCTIONS:
            raise ParseError(f"coordinate name {name!r} clashes with a function name")
    if not isinstance(text, str):
        text = str(text)
    return _Parser(text, chart).parse()


# ---------------------------------------------------------------------------
# printer


def _const_text(v: Fraction):
    if v.denominator == 1:
        return str(v.numerator), (_PREC_ATOM if v >= 0 else _PREC_UNARY)
    return f"{v.numerator}/{v.denominator}", _PREC_MUL


def _text(e: Expr):
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Coord):
        return e.name, _PREC_ATOM
    if isinstance(e, Func):
        return f"{e.name}({_text(e.arg)[0]})", _PREC_ATOM
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _PREC_UNARY), _PREC_UNARY
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _PREC_ATOM)}^{e.exponent}", _PREC_POW
    if isinstance(e, BinOp):
        prec = _PREC_ADD if e.op in "+-" else _PREC_MUL
        left = _wrap(e.left, prec)
        right = _wrap(e.right, prec + 1)
        if e.op in "+-":
            return f"{left} {e.op} {right}", prec
        return f"{left}{e.op}{right}", prec
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e: Expr, min_prec: int) -> str:
    s, p = _text(e)
    return s if p >= min_prec else f"({s})"


def to_text(e: Expr) -> str:
    """Text form that parses back to an expression printing identically."""
    return _text(e)[0]


def variables(e: Expr) -> set[str]:
    """Names of the coordinates occurring in ``e``."""
    out: set[str] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Coord):
            out.add(n.name)
        elif isinstance(n, (Neg, Func)):
            stack.append(n.arg)
        elif isinstance(n, Pow):
            stack.append(n.base)
        elif isinstance(n, BinOp):
            stack.extend((n.left, n.right))
    return out


def is_rational(e: Expr) -> bool:
    """True when ``e`` uses only field operations (no transcendental functions)."""
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Func):
            if n.name != "sqrt":
                return False
            stack.append(n.arg)
        elif isinstance(n, Neg):
            stack.append(n.arg)
        elif isinstance(n, Pow):
            stack.append(n.base)
        elif isinstance(n, BinOp):
            stack.extend((n.left, n.right))
    return True


# ---------------------------------------------------------------------------
# jet evaluation


class _Evaluator:
    def __init__(self, point, order: int, mode: str):
        self.mode = mode
        self.order = order
        self.nvars = len(point)
        self.point = tuple(J.to_scalar(x, mode) for x in point)
        self.cache: dict = {}

    def __call__(self, e: Expr) -> np.ndarray:
        hit = self.cache.get(e)
        if hit is not None:
            return hit
        out = self._eval(e)
        self.cache[e] = out
        return out

    def _eval(self, e: Expr) -> np.ndarray:
        n = self.nvars
        if isinstance(e, Const):
            return J.constant(J.to_scalar(e.value, self.mode), n, self.order, self.mode)
        if isinstance(e, Coord):
            if e.index >= n:
                raise EvaluationError(f"coordinate {e.name} outside a {n}-dimensional point")
            return J.variable(e.index, self.point, self.order, self.mode)
        if isinstance(e, Neg):
            return -self(e.arg)
        if isinstance(e, BinOp):
            a, b = self(e.left), self(e.right)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return J.mul(a, b, n)
            return J.mul(a, J.reciprocal(b, n, to_text(e)), n)
        if isinstance(e, Pow):
            return J.power(self(e.base), e.exponent, n, to_text(e))
        if isinstance(e, Func):
            fn = {"exp": J.exp, "ln": J.log, "sin": J.sin, "cos": J.cos, "sqrt": J.sqrt}[e.name]
            return fn(self(e.arg), n, to_text(e))
        raise TypeError(f"not an expression node: {e!r}")


def eval_jet(e: Expr, point, order: int, mode: str = J.RATIONAL) -> J.Jet:
    """Taylor expansion of ``e`` at ``point`` truncated at total degree ``order``."""
    ev = _Evaluator(point, order, mode)
    return J.Jet(ev.point, order, mode, ev(e))


def eval_many(exprs, point, order: int, mode: str = J.RATIONAL) -> np.ndarray:
    """Evaluate an array of expressions; result has the jet axis appended.

    Shared subexpressions are evaluated once.
    """
    exprs = np.asarray(exprs, dtype=object)
    ev = _Evaluator(point, order, mode)
    out = J.zeros(exprs.shape + (J.jet_size(len(point), order),), mode)
    for idx in np.ndindex(exprs.shape):
        out[idx] = ev(as_expr(exprs[idx]))
    return out


def evaluate(e: Expr, point, mode: str = J.RATIONAL):
    """Plain value of ``e`` at ``point``."""
    return eval_jet(e, point, 0, mode).value


def partial(j: J.Jet, alpha) -> object:
    return j.partial(alpha)
