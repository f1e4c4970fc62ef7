"""Polynomial expressions over F_q: a small recursive-descent parser and evaluators.

Grammar (``^`` binds tighter than ``*``, which binds tighter than ``+``/``-``)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := '-' unary | power
    power  := atom ('^' INT)?
    atom   := INT | 'a' | NAME | '(' expr ')'

Integers are reduced mod p; ``a`` is the generator of F_q (only when q is not
prime).  Subtraction and negation are stored as multiplication by the
constant -1 so the tree only has the five node kinds below.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ParseError
from .field import EmbeddingMap, FieldDescriptor, FieldElement


@dataclass(frozen=True)
class Const:
    value: FieldElement


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Add:
    left: "PolyExpr"
    right: "PolyExpr"


@dataclass(frozen=True)
class Mul:
    left: "PolyExpr"
    right: "PolyExpr"


@dataclass(frozen=True)
class Pow:
    base: "PolyExpr"
    exponent: int


PolyExpr = Union[Const, Var, Add, Mul, Pow]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("int", m.group(1), start))
        elif m.group(2):
            tokens.append(("name", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*^()":
                raise ParseError(f"unexpected character {ch!r}", start)
            tokens.append(("op", ch, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, variables: list[str], field: FieldDescriptor):
        self.tokens = _tokenize(text)
        self.i = 0
        self.vars = set(variables)
        self.field = field

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, ch: str):
        kind, val, pos = self.take()
        if kind != "op" or val != ch:
            raise ParseError(f"expected {ch!r}, found {val or 'end of input'!r}", pos)

    def parse(self) -> PolyExpr:
        node = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return node

    def expr(self) -> PolyExpr:
        node = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                if val == "-":
                    rhs = Mul(Const(self.field.from_int(-1)), rhs)
                node = Add(node, rhs)
            else:
                return node

    def term(self) -> PolyExpr:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            node = Mul(node, self.unary())
        return node

    def unary(self) -> PolyExpr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Mul(Const(self.field.from_int(-1)), self.unary())
        return self.power()

    def power(self) -> PolyExpr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, pos = self.take()
            if kind == "op" and val == "-":
                raise ParseError("exponent must be a positive integer", pos)
            if kind != "int":
                raise ParseError("expected an integer exponent", pos)
            k = int(val)
            if k <= 0:
                raise ParseError("exponent must be a positive integer", pos)
            return Pow(base, k)
        return base

    def atom(self) -> PolyExpr:
        kind, val, pos = self.take()
        if kind == "int":
            return Const(self.field.from_int(int(val)))
        if kind == "name":
            if val in self.vars:
                return Var(val)
            if val == "a":
                if self.field.d == 1:
                    raise ParseError("'a' is only available when q is not prime", pos)
                return Const(self.field.gen)
            raise ParseError(f"unknown identifier {val!r}", pos)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse_polynomial(text: str, variables: list[str], field: FieldDescriptor) -> PolyExpr:
    return _Parser(text, list(variables), field).parse()


def variables_of(expr: PolyExpr) -> set[str]:
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, Const):
        return set()
    if isinstance(expr, Pow):
        return variables_of(expr.base)
    return variables_of(expr.left) | variables_of(expr.right)


def eval_poly(expr: PolyExpr, point: dict[str, FieldElement], embedding: EmbeddingMap) -> FieldElement:
    """Evaluate at a point of the working field; constants pass through ``embedding``."""
    if isinstance(expr, Const):
        return embedding(expr.value)
    if isinstance(expr, Var):
        return point[expr.name]
    if isinstance(expr, Add):
        return eval_poly(expr.left, point, embedding) + eval_poly(expr.right, point, embedding)
    if isinstance(expr, Mul):
        return eval_poly(expr.left, point, embedding) * eval_poly(expr.right, point, embedding)
    return eval_poly(expr.base, point, embedding) ** expr.exponent


def eval_array(expr: PolyExpr, coords: dict[str, np.ndarray], embedding: EmbeddingMap) -> np.ndarray:
    """Vectorised evaluation; ``coords`` maps each variable to an array of canonical indices."""
    F = embedding.target
    shape = next(iter(coords.values())).shape if coords else ()

    def ev(node):
        if isinstance(node, Const):
            return np.full(shape, embedding.table[node.value.index], dtype=np.int64)
        if isinstance(node, Var):
            return coords[node.name]
        if isinstance(node, Add):
            return F.vadd(ev(node.left), ev(node.right))
        if isinstance(node, Mul):
            return F.vmul(ev(node.left), ev(node.right))
        return F.vpow(ev(node.base), node.exponent)

    return ev(expr)


# univariate polynomials over the base field: coefficient lists, constant first

def _trim(a: list[FieldElement]) -> list[FieldElement]:
    while a and a[-1].is_zero():
        a.pop()
    return a


def _umul(a: list[FieldElement], b: list[FieldElement], zero: FieldElement) -> list[FieldElement]:
    if not a or not b:
        return []
    out = [zero] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if not x.is_zero():
            for j, y in enumerate(b):
                out[i + j] = out[i + j] + x * y
    return _trim(out)


def _uadd(a: list[FieldElement], b: list[FieldElement], zero: FieldElement) -> list[FieldElement]:
    n = max(len(a), len(b))
    a = a + [zero] * (n - len(a))
    b = b + [zero] * (n - len(b))
    return _trim([x + y for x, y in zip(a, b)])


def umod(a: list[FieldElement], g: list[FieldElement]) -> list[FieldElement]:
    a = _trim(list(a))
    lead = g[-1].inverse()
    while len(a) >= len(g):
        c = a[-1] * lead
        s = len(a) - len(g)
        for i, y in enumerate(g):
            a[s + i] = a[s + i] - c * y
        _trim(a)
    return a


def umulmod(a, b, g):
    return umod(_umul(a, b, g[0].field.zero), g)


def upowmod(a: list[FieldElement], k: int, g: list[FieldElement]) -> list[FieldElement]:
    one = g[0].field.one
    result = umod([one], g)
    base = umod(a, g)
    while k:
        if k & 1:
            result = umulmod(result, base, g)
        base = umulmod(base, base, g)
        k >>= 1
    return result


def expand_univariate(expr: PolyExpr, var: str, field: FieldDescriptor, max_degree: int = 256) -> list[FieldElement] | None:
    """Coefficients of ``expr`` as a polynomial in ``var`` (constant first).

    None when another variable occurs or some intermediate degree exceeds
    ``max_degree``.
    """
    zero = field.zero

    def ex(node):
        if isinstance(node, Const):
            return _trim([node.value])
        if isinstance(node, Var):
            if node.name != var:
                return None
            return [zero, field.one]
        if isinstance(node, Pow):
            b = ex(node.base)
            if b is None or (len(b) - 1) * node.exponent > max_degree:
                return None
            out = [field.one]
            for _ in range(node.exponent):
                out = _umul(out, b, zero)
            return out
        left, right = ex(node.left), ex(node.right)
        if left is None or right is None:
            return None
        if isinstance(node, Add):
            return _uadd(left, right, zero)
        if len(left) + len(right) - 2 > max_degree:
            return None
        return _umul(left, right, zero)

    return ex(expr)
