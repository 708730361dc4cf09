"""Expression language for fundamental functions and metric components.

Grammar::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' number)? | '-' factor
    atom   := number | ident | func '(' expr ')' | '(' expr ')'
    ident  := ('x'|'y'|'p') digit+
    func   := 'sqrt'|'exp'|'log'|'sin'|'cos'

Variables are laid out in a chart point as ``(x1..xn, f1..fm)`` where the fiber
coordinates ``f`` are ``y`` for vector bundles and ``p`` for covector bundles.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .jet import Jet, JetDomainError

FUNCTIONS = ("sqrt", "exp", "log", "sin", "cos")
FIBER_LETTER = {"vector": "y", "covector": "p"}


# ---------------------------------------------------------------------------
# errors


class ParseError(ValueError):
    """Base class for all parse failures; ``offset`` is a UTF-8 byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.offset = offset
        self.reason = message


class ExprSyntaxError(ParseError):
    pass


class UnknownIdentifierError(ParseError):
    pass


class IndexRangeError(ParseError):
    pass


class FiberKindError(ParseError):
    pass


class DomainError(ValueError):
    """Evaluation left the domain of a function; names the subexpression."""

    def __init__(self, message: str, subexpr: "Expr"):
        super().__init__(f"{message} in {to_string(subexpr)}")
        self.subexpr = subexpr


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    kind: str  # 'x', 'y' or 'p'
    index: int  # 1-based


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' or a function name
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # '+', '-', '*', '/'
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float


Expr = Union[Const, Var, Unary, Binary, Pow]


def node_count(e: Expr) -> int:
    """Number of AST nodes (a constant exponent is an attribute of Pow)."""
    if isinstance(e, (Const, Var)):
        return 1
    if isinstance(e, Unary):
        return 1 + node_count(e.arg)
    if isinstance(e, Pow):
        return 1 + node_count(e.base)
    return 1 + node_count(e.left) + node_count(e.right)


def variables(e: Expr) -> set[Var]:
    if isinstance(e, Var):
        return {e}
    if isinstance(e, Const):
        return set()
    if isinstance(e, Unary):
        return variables(e.arg)
    if isinstance(e, Pow):
        return variables(e.base)
    return variables(e.left) | variables(e.right)


# ---------------------------------------------------------------------------
# tokenizer / parser

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int  # character position


class _Parser:
    def __init__(self, text: str, n: int, m: int, fiber_kind: str):
        self.text = text
        self.n, self.m = n, m
        self.fiber = FIBER_LETTER[fiber_kind]
        self.fiber_kind = fiber_kind
        self.toks = self._tokenize(text)
        self.k = 0

    def _byte(self, pos: int) -> int:
        return len(self.text[:pos].encode("utf-8"))

    def _tokenize(self, text: str) -> list[_Tok]:
        toks = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            mt = _TOKEN.match(text, pos)
            if not mt or mt.end() == pos:
                raise ExprSyntaxError(f"unexpected character {text[pos]!r}", self._byte(pos))
            kind = mt.lastgroup
            start = mt.start(kind)
            toks.append(_Tok(kind, mt.group(kind), start))
            pos = mt.end()
        toks.append(_Tok("end", "", len(text)))
        return toks

    def peek(self) -> _Tok:
        return self.toks[self.k]

    def take(self) -> _Tok:
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, text: str) -> None:
        t = self.take()
        if t.text != text or t.kind == "end":
            raise ExprSyntaxError(f"expected {text!r}", self._byte(t.pos))

    def error(self, msg: str, tok: _Tok):
        return ExprSyntaxError(msg, self._byte(tok.pos))

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise self.error(f"unexpected token {t.text!r}", t)
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            left = Binary(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            left = Binary(op, left, self.factor())
        return left

    def factor(self) -> Expr:
        t = self.peek()
        if t.kind == "op" and t.text == "-":
            self.take()
            return Unary("neg", self.factor())
        base = self.atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            num = self.take()
            if num.kind != "num":
                raise self.error("exponent must be a number literal", num)
            return Pow(base, float(num.text))
        return base

    def atom(self) -> Expr:
        t = self.take()
        if t.kind == "num":
            return Const(float(t.text))
        if t.kind == "op" and t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "name":
            if t.text in FUNCTIONS:
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return Unary(t.text, e)
            return self.ident(t)
        if t.kind == "end":
            raise self.error("unexpected end of input", t)
        raise self.error(f"unexpected token {t.text!r}", t)

    def ident(self, t: _Tok) -> Var:
        mt = re.fullmatch(r"([xyp])(\d+)", t.text)
        if not mt:
            raise UnknownIdentifierError(f"unknown identifier {t.text!r}", self._byte(t.pos))
        kind, idx = mt.group(1), int(mt.group(2))
        if kind != "x" and kind != self.fiber:
            raise FiberKindError(
                f"fiber variable {t.text!r} not allowed for {self.fiber_kind} bundles", self._byte(t.pos)
            )
        limit = self.n if kind == "x" else self.m
        if not 1 <= idx <= limit:
            raise IndexRangeError(f"variable {t.text!r} index out of range 1..{limit}", self._byte(t.pos))
        return Var(kind, idx)


def parse(text: str, n: int, m: int, fiber_kind: str = "vector") -> Expr:
    """Parse ``text`` into an AST, validating identifiers against the chart."""
    if n < 1 or m < 1:
        raise ValueError("dimensions n and m must be >= 1")
    if fiber_kind not in FIBER_LETTER:
        raise ValueError(f"fiber_kind must be 'vector' or 'covector', got {fiber_kind!r}")
    return _Parser(text, n, m, fiber_kind).parse()


# ---------------------------------------------------------------------------
# printing


def _num(v: float) -> str:
    s = format(v, ".17g")
    if s in ("inf", "-inf", "nan"):
        raise ValueError("non-finite constant")
    return s


def to_string(e: Expr) -> str:
    """Canonical fully parenthesized form; ``parse(to_string(e)) == e``."""
    if isinstance(e, Const):
        return _num(e.value)
    if isinstance(e, Var):
        return f"{e.kind}{e.index}"
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-{to_string(e.arg)})"
        return f"{e.op}({to_string(e.arg)})"
    if isinstance(e, Pow):
        return f"({to_string(e.base)}^{_num(e.exponent)})"
    return f"({to_string(e.left)}{e.op}{to_string(e.right)})"


# ---------------------------------------------------------------------------
# evaluation


def _slot(v: Var, n: int) -> int:
    return v.index - 1 if v.kind == "x" else n + v.index - 1


def _check_point(u: Sequence[float], n: int, m: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.shape != (n + m,):
        raise ValueError(f"chart point must have {n + m} coordinates, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("chart point has non-finite coordinates")
    return u


def _eval_float(e: Expr, u: np.ndarray, n: int) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(u[_slot(e, n)])
    if isinstance(e, Unary):
        a = _eval_float(e.arg, u, n)
        if e.op == "neg":
            return -a
        if e.op == "sqrt":
            if a < 0:
                raise DomainError("sqrt of negative argument", e)
            return math.sqrt(a)
        if e.op == "log":
            if a <= 0:
                raise DomainError("log of non-positive argument", e)
            return math.log(a)
        return getattr(math, e.op)(a)
    if isinstance(e, Pow):
        b = _eval_float(e.base, u, n)
        p = e.exponent
        if b == 0 and p < 0:
            raise DomainError("negative power of zero", e)
        if b < 0 and not float(p).is_integer():
            raise DomainError("non-integer power of negative argument", e)
        return b**p
    a = _eval_float(e.left, u, n)
    b = _eval_float(e.right, u, n)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0:
        raise DomainError("division by zero", e)
    return a / b


def evaluate(e: Expr, u: Sequence[float], n: int, m: int) -> float:
    """Plain floating-point evaluation at a chart point."""
    return _eval_float(e, _check_point(u, n, m), n)


def _eval_jet(e: Expr, xs: list[Jet], n: int) -> Union[Jet, float]:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return xs[_slot(e, n)]
    try:
        if isinstance(e, Unary):
            a = _eval_jet(e.arg, xs, n)
            if e.op == "neg":
                return -a
            if not isinstance(a, Jet):
                return _eval_float(Unary(e.op, Const(a)), np.zeros(0), n)
            return getattr(a, e.op)()
        if isinstance(e, Pow):
            b = _eval_jet(e.base, xs, n)
            if not isinstance(b, Jet):
                return _eval_float(Pow(Const(b), e.exponent), np.zeros(0), n)
            return b.power(e.exponent)
        a = _eval_jet(e.left, xs, n)
        b = _eval_jet(e.right, xs, n)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if not isinstance(b, Jet):
            if b == 0:
                raise DomainError("division by zero", e)
            return a / b
        return a / b
    except JetDomainError as exc:
        raise DomainError(str(exc), e) from None
    except DomainError as exc:
        if isinstance(exc.subexpr, Const):
            raise DomainError(str(exc).split(" in ")[0], e) from None
        raise


def eval_jet(e: Expr, u: Sequence[float], order: int, n: int, m: int) -> Jet:
    """Jet of ``e`` at ``u`` holding all partials up to ``order``."""
    u = _check_point(u, n, m)
    xs = Jet.variables(u, order)
    r = _eval_jet(e, xs, n)
    if not isinstance(r, Jet):
        r = Jet.constant(r, n + m, order)
    return r


def eval_jet_array(exprs, u: Sequence[float], order: int, n: int, m: int) -> Jet:
    """Evaluate a nested list (matrix) of expressions into one array Jet."""
    u = _check_point(u, n, m)
    xs = Jet.variables(u, order)

    def rec(obj):
        if isinstance(obj, (list, tuple)):
            return Jet.stack([rec(o) for o in obj], axis=0)
        r = _eval_jet(obj, xs, n)
        return r if isinstance(r, Jet) else Jet.constant(r, n + m, order)

    return rec(exprs)


# ---------------------------------------------------------------------------
# small AST builders used by space constructions


def add(a: Expr, b: Expr) -> Expr:
    return Binary("+", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    return Binary("*", a, b)


def quadratic_form(coeffs, fiber: str = "y") -> Expr:
    """sum_ij coeffs[i][j] * f_i * f_j as an AST."""
    terms = None
    for i, row in enumerate(coeffs):
        for j, c in enumerate(row):
            t = mul(mul(c, Var(fiber, i + 1)), Var(fiber, j + 1))
            terms = t if terms is None else add(terms, t)
    return terms
