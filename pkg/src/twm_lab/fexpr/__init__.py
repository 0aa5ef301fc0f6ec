"""Expression language for user-defined discount functions, with forward-mode gradients."""

from .errors import (
    ArityError,
    DomainError,
    FexprError,
    FexprSyntaxError,
    IndexOutOfRange,
    NondifferentiableExpr,
    ShapeError,
    UnknownIdentifier,
)
from .evaluate import branch_signature, evaluate, grad, make_env, uses, value_and_grad
from .nodes import BinOp, Call, Expr, Index, Neg, Num, Var
from .parser import parse, tokenize
from .printer import pretty

__all__ = [
    "ArityError",
    "BinOp",
    "Call",
    "DomainError",
    "Expr",
    "FexprError",
    "FexprSyntaxError",
    "Index",
    "IndexOutOfRange",
    "Neg",
    "NondifferentiableExpr",
    "Num",
    "ShapeError",
    "UnknownIdentifier",
    "Var",
    "branch_signature",
    "evaluate",
    "grad",
    "make_env",
    "parse",
    "pretty",
    "tokenize",
    "uses",
    "value_and_grad",
]
