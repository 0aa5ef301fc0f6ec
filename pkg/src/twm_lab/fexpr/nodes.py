"""Immutable AST for discount-function expressions.

Source positions are carried on every node but excluded from equality, so two
trees parsed from differently formatted text compare equal when their
structure does.
"""

from dataclasses import dataclass, field
from typing import Tuple

VECTORS = ("p", "R", "delta", "wstar")
SCALARS = ("f",)

UNARY_FUNCS = ("ln", "exp", "sqrt", "abs")
BINARY_FUNCS = ("min", "max")
AGGREGATES = {"dot": 2, "sum": 1, "norm2": 1}

ARITY = {**{name: 1 for name in UNARY_FUNCS}, **{name: 2 for name in BINARY_FUNCS}, **AGGREGATES}


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self):
        return f"line {self.line}, column {self.col}"


NOPOS = Pos(0, 0)


class Expr:
    """Base class; subclasses are frozen dataclasses."""

    pos: Pos
    #: True when the node evaluates to a vector of length n.
    is_vector: bool


@dataclass(frozen=True)
class Num(Expr):
    value: float
    pos: Pos = field(default=NOPOS, compare=False, repr=False)

    is_vector = False


@dataclass(frozen=True)
class Var(Expr):
    """A whole named vector (p, R, delta, wstar) or the scalar f."""

    name: str
    pos: Pos = field(default=NOPOS, compare=False, repr=False)

    @property
    def is_vector(self):
        return self.name in VECTORS


@dataclass(frozen=True)
class Index(Expr):
    """``name[index]`` with a 1-based index."""

    name: str
    index: int
    pos: Pos = field(default=NOPOS, compare=False, repr=False)

    is_vector = False


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)

    @property
    def is_vector(self):
        return self.operand.is_vector


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)

    @property
    def is_vector(self):
        return self.left.is_vector or self.right.is_vector


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: Tuple[Expr, ...]
    pos: Pos = field(default=NOPOS, compare=False, repr=False)

    @property
    def is_vector(self):
        if self.func in AGGREGATES:
            return False
        return any(a.is_vector for a in self.args)


def walk(expr):
    """Yield every node of the tree in pre-order."""
    yield expr
    if isinstance(expr, Neg):
        yield from walk(expr.operand)
    elif isinstance(expr, BinOp):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, Call):
        for arg in expr.args:
            yield from walk(arg)


def depth(expr):
    if isinstance(expr, Neg):
        return 1 + depth(expr.operand)
    if isinstance(expr, BinOp):
        return 1 + max(depth(expr.left), depth(expr.right))
    if isinstance(expr, Call):
        return 1 + max(depth(a) for a in expr.args)
    return 0
