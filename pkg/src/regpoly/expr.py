"""Closed-form scalar functions: parsing, exact differentiation, jets.

The grammar is a small infix language::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | factor
    factor := base ('^' ['-'] integer)?
    base   := number | ident | '(' expr ')' | func '(' expr ')'
    func   := exp | ln | sin | cos | sqrt

Identifiers are resolved against an ordered variable list, e.g.
``("x1", "x2")`` or ``("x1", "t")``.  Trees are immutable and compare
structurally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Sequence, Union

from . import multiindex as mi
from . import numeric
from . import series as ser
from .series import Series

FUNCTIONS = ("exp", "ln", "sin", "cos", "sqrt")
IDENTIFIERS = tuple(f"x{i}" for i in range(1, 10)) + ("t",)


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, text: str = "", position: int = -1):
        if position >= 0:
            message = f"{message} at position {position}: {text!r}"
        super().__init__(message)
        self.position = position


class UnknownIdentifierError(ExprSyntaxError):
    pass


class EvaluationError(ArithmeticError):
    """Division by zero or a function evaluated outside its domain."""


# --------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Expr:
    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int
    name: str = field(compare=False)


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


ZERO = Num(0.0)
ONE = Num(1.0)


# constant-folding constructors --------------------------------------------

def _is_num(e, v=None):
    return isinstance(e, Num) and (v is None or e.value == v)


def add(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    if _is_num(a, 0):
        return b
    if _is_num(b, 0):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    if _is_num(b, 0):
        return a
    if _is_num(a, 0):
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    if _is_num(a, 0) or _is_num(b, 0):
        return ZERO
    if _is_num(a, 1):
        return b
    if _is_num(b, 1):
        return a
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if _is_num(a, 0):
        return ZERO
    if _is_num(b, 1):
        return a
    if _is_num(a) and _is_num(b) and b.value != 0:
        return Num(a.value / b.value)
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if _is_num(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if _is_num(a) and (a.value != 0 or n > 0):
        return Num(a.value ** n)
    return Pow(a, n)


def func(name: str, a: Expr) -> Expr:
    return Func(name, a)


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    text_len = len(text)
    while pos < text_len:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start(m.lastindex)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", text_len))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = list(variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value:
            raise ExprSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", self.text, pos)

    def parse(self) -> Expr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", self.text, pos)
        return e

    def expr(self):
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.term()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def term(self):
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            right = self.unary()
            left = Mul(left, right) if op == "*" else Div(left, right)
        return left

    def unary(self):
        if self.peek()[:2] == ("op", "-"):
            self.take()
            operand = self.unary()
            if isinstance(operand, Num):
                return Num(-operand.value)
            return Neg(operand)
        return self.factor()

    def factor(self):
        base = self.base()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            sign = 1
            if self.peek()[:2] == ("op", "-"):
                self.take()
                sign = -1
            kind, val, pos = self.take()
            if kind != "num" or not val.isdigit():
                raise ExprSyntaxError("exponent must be an integer literal", self.text, pos)
            return Pow(base, sign * int(val))
        return base

    def base(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(val, arg)
            if val in self.variables:
                return Var(self.variables.index(val), val)
            raise UnknownIdentifierError(f"unknown identifier {val!r}", self.text, pos)
        if val == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ExprSyntaxError(f"unexpected {val or 'end of input'!r}", self.text, pos)


def parse(text: str, variables: Sequence[str] = ("x1",)) -> Expr:
    for v in variables:
        if v not in IDENTIFIERS:
            raise UnknownIdentifierError(f"variable name {v!r} not allowed")
    return _Parser(text, variables).parse()


# --------------------------------------------------------------------------
# printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Num) and e.value < 0:
        return 3
    return _PREC.get(type(e), 5)


def _num_text(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_text(e: Expr) -> str:
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Neg):
        inner = to_text(e.operand)
        return f"-({inner})" if _prec(e.operand) < 3 else f"-{inner}"
    if isinstance(e, Pow):
        inner = to_text(e.base)
        if _prec(e.base) <= 4:
            inner = f"({inner})"
        return f"{inner}^{e.exponent}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    p = _PREC[type(e)]
    left = to_text(e.left)
    if _prec(e.left) < p:
        left = f"({left})"
    right = to_text(e.right)
    # operators are left-associative, so an equal-precedence right operand
    # keeps its parentheses to round-trip to the same tree
    if _prec(e.right) <= p:
        right = f"({right})"
    return f"{left}{op}{right}"


# --------------------------------------------------------------------------
# differentiation


def diff(e: Expr, var: int) -> Expr:
    """Exact symbolic derivative with respect to variable index ``var``."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == var else ZERO
    if isinstance(e, Add):
        return add(diff(e.left, var), diff(e.right, var))
    if isinstance(e, Sub):
        return sub(diff(e.left, var), diff(e.right, var))
    if isinstance(e, Neg):
        return neg(diff(e.operand, var))
    if isinstance(e, Mul):
        return add(mul(diff(e.left, var), e.right), mul(e.left, diff(e.right, var)))
    if isinstance(e, Div):
        da, db = diff(e.left, var), diff(e.right, var)
        if _is_num(db, 0):
            return div(da, e.right)
        return div(sub(mul(da, e.right), mul(e.left, db)), power(e.right, 2))
    if isinstance(e, Pow):
        n = e.exponent
        return mul(mul(Num(float(n)), power(e.base, n - 1)), diff(e.base, var))
    if isinstance(e, Func):
        du = diff(e.arg, var)
        if _is_num(du, 0):
            return ZERO
        u = e.arg
        if e.name == "exp":
            outer = e
        elif e.name == "ln":
            return div(du, u)
        elif e.name == "sin":
            outer = Func("cos", u)
        elif e.name == "cos":
            outer = neg(Func("sin", u))
        elif e.name == "sqrt":
            return div(du, mul(Num(2.0), e))
        else:  # pragma: no cover - parser restricts names
            raise ValueError(e.name)
        return mul(outer, du)
    raise TypeError(f"not an expression: {e!r}")


def diff_multi(e: Expr, gamma: Sequence[int]) -> Expr:
    for var, count in enumerate(gamma):
        for _ in range(count):
            e = diff(e, var)
    return e


# --------------------------------------------------------------------------
# evaluation


def evaluate(e: Expr, point: Sequence) -> object:
    """Evaluate at ``point`` in the active precision mode."""
    try:
        return _eval(e, point)
    except ZeroDivisionError as exc:
        raise EvaluationError(f"division by zero evaluating {to_text(e)}") from exc
    except ValueError as exc:
        raise EvaluationError(f"domain error evaluating {to_text(e)}: {exc}") from exc


def _eval(e, x):
    if isinstance(e, Num):
        return numeric.num(e.value)
    if isinstance(e, Var):
        return numeric.num(x[e.index])
    if isinstance(e, Add):
        return _eval(e.left, x) + _eval(e.right, x)
    if isinstance(e, Sub):
        return _eval(e.left, x) - _eval(e.right, x)
    if isinstance(e, Mul):
        return _eval(e.left, x) * _eval(e.right, x)
    if isinstance(e, Div):
        d = _eval(e.right, x)
        if d == 0:
            raise ZeroDivisionError
        return _eval(e.left, x) / d
    if isinstance(e, Neg):
        return -_eval(e.operand, x)
    if isinstance(e, Pow):
        b = _eval(e.base, x)
        if b == 0 and e.exponent < 0:
            raise ZeroDivisionError
        return b ** e.exponent
    if isinstance(e, Func):
        u = _eval(e.arg, x)
        if e.name == "exp":
            return numeric.exp(u)
        if e.name == "ln":
            if u <= 0:
                raise ValueError("ln of nonpositive value")
            return numeric.log(u)
        if e.name == "sin":
            return numeric.sin(u)
        if e.name == "cos":
            return numeric.cos(u)
        if e.name == "sqrt":
            if u < 0:
                raise ValueError("sqrt of negative value")
            return numeric.sqrt(u)
    raise TypeError(f"not an expression: {e!r}")


# --------------------------------------------------------------------------
# jets


Order = Union[int, Sequence[int]]


@dataclass(frozen=True)
class JetValue:
    """Derivatives ``D^gamma h(point)`` for every ``gamma`` in ``indices``.

    ``order`` is an int (univariate order, or total degree when n > 1) or a
    per-axis multiindex bound.
    """

    point: tuple
    order: object
    entries: dict

    def __getitem__(self, gamma):
        if isinstance(gamma, int):
            gamma = (gamma,)
        return self.entries[tuple(gamma)]

    def __len__(self):
        return len(self.entries)

    @property
    def indices(self) -> list[tuple[int, ...]]:
        return list(self.entries)

    def values(self) -> list:
        return list(self.entries.values())

    @property
    def value(self):
        return self.entries[(0,) * len(self.point)]


def jet_indices(order: Order, n: int) -> tuple[list[tuple[int, ...]], tuple[int, ...], int | None]:
    """Index set, per-axis bound and total-degree cap for a jet order spec."""
    if isinstance(order, int):
        if order < 0:
            raise ValueError("jet order must be nonnegative")
        if n == 1:
            return mi.box((order,)), (order,), None
        return mi.simplex(n, order), (order,) * n, order
    bound = tuple(int(b) for b in order)
    if len(bound) != n:
        raise ValueError(f"order {bound} does not match dimension {n}")
    return mi.box(bound), bound, None


def taylor(e: Expr, point: Sequence, bound: Sequence[int], total: int | None = None) -> Series:
    """Propagate a truncated Taylor series through the tree."""
    cache: dict = {}
    pt = [numeric.num(v) for v in point]
    try:
        return _taylor(e, pt, tuple(bound), total, cache)
    except ZeroDivisionError as exc:
        raise EvaluationError(f"division by zero evaluating {to_text(e)}") from exc
    except ValueError as exc:
        raise EvaluationError(f"domain error evaluating {to_text(e)}: {exc}") from exc


def _taylor(e, pt, bound, total, cache):
    key = id(e)
    hit = cache.get(key)
    if hit is not None and hit[0] is e:
        return hit[1]
    if isinstance(e, Num):
        out = Series.constant(numeric.num(e.value), bound, total)
    elif isinstance(e, Var):
        out = Series.variable(pt[e.index], e.index, bound, total)
    elif isinstance(e, Add):
        out = _taylor(e.left, pt, bound, total, cache) + _taylor(e.right, pt, bound, total, cache)
    elif isinstance(e, Sub):
        out = _taylor(e.left, pt, bound, total, cache) - _taylor(e.right, pt, bound, total, cache)
    elif isinstance(e, Mul):
        out = _taylor(e.left, pt, bound, total, cache) * _taylor(e.right, pt, bound, total, cache)
    elif isinstance(e, Div):
        out = _taylor(e.left, pt, bound, total, cache) / _taylor(e.right, pt, bound, total, cache)
    elif isinstance(e, Neg):
        out = -_taylor(e.operand, pt, bound, total, cache)
    elif isinstance(e, Pow):
        out = _taylor(e.base, pt, bound, total, cache) ** e.exponent
    elif isinstance(e, Func):
        arg = _taylor(e.arg, pt, bound, total, cache)
        out = getattr(ser, "log" if e.name == "ln" else e.name)(arg)
    else:
        raise TypeError(f"not an expression: {e!r}")
    cache[key] = (e, out)
    return out


def eval_jet(e: Expr, point: Sequence, order: Order, method: str = "taylor") -> JetValue:
    """Exact derivatives of ``e`` at ``point`` up to ``order``.

    ``method="taylor"`` propagates truncated series; ``method="symbolic"``
    differentiates the tree repeatedly and evaluates.  Both are exact up
    to rounding and are cross-checked in the tests.
    """
    point = tuple(point)
    indices, bound, total = jet_indices(order, len(point))
    if method == "taylor":
        s = taylor(e, point, bound, total)
        entries = s.derivatives(indices)
    elif method == "symbolic":
        entries = {}
        derived: dict = {(0,) * len(point): e}
        for gamma in indices:
            entries[gamma] = evaluate(_derived(e, gamma, derived), point)
    else:
        raise ValueError(f"unknown jet method {method!r}")
    return JetValue(point, order if isinstance(order, int) else tuple(order), entries)


def _derived(e, gamma, memo):
    gamma = tuple(gamma)
    if gamma in memo:
        return memo[gamma]
    # peel one derivative off the last nonzero axis
    axis = max(i for i, g in enumerate(gamma) if g)
    parent = list(gamma)
    parent[axis] -= 1
    out = diff(_derived(e, tuple(parent), memo), axis)
    memo[gamma] = out
    return out


def variables_for(n: int, time_axis: bool = False) -> tuple[str, ...]:
    """Default variable names: ``x1..xn`` or ``x1..x(n-1), t``."""
    if time_axis:
        return tuple(f"x{i}" for i in range(1, n)) + ("t",)
    return tuple(f"x{i}" for i in range(1, n + 1))
