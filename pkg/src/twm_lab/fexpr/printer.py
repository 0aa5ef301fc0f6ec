"""Pretty printer producing minimal-parenthesis source that re-parses to the same tree."""

import numpy as np

from .nodes import BinOp, Call, Index, Neg, Num, Var

_ADD, _MUL, _NEG, _POW, _ATOM = 1, 2, 3, 4, 5
_BINPREC = {"+": _ADD, "-": _ADD, "*": _MUL, "/": _MUL, "^": _POW}


def _prec(node):
    if isinstance(node, BinOp):
        return _BINPREC[node.op]
    if isinstance(node, Neg):
        return _NEG
    return _ATOM


def _wrap(node, needs_parens):
    text = pretty(node)
    return f"({text})" if needs_parens else text


def format_number(value):
    if value < 0 or not np.isfinite(value):
        raise ValueError(f"literal must be a finite nonnegative number, got {value!r}")
    return np.format_float_positional(value, unique=True, trim="-")


def pretty(expr):
    if isinstance(expr, Num):
        return format_number(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Index):
        return f"{expr.name}[{expr.index}]"
    if isinstance(expr, Neg):
        return "-" + _wrap(expr.operand, _prec(expr.operand) < _NEG)
    if isinstance(expr, Call):
        return f"{expr.func}({', '.join(pretty(a) for a in expr.args)})"
    if isinstance(expr, BinOp):
        prec = _BINPREC[expr.op]
        if expr.op == "^":
            left = _wrap(expr.left, _prec(expr.left) < _ATOM)
            right = _wrap(expr.right, _prec(expr.right) < _NEG)
            return f"{left}^{right}"
        left = _wrap(expr.left, _prec(expr.left) < prec)
        right = _wrap(expr.right, _prec(expr.right) <= prec)
        return f"{left} {expr.op} {right}"
    raise TypeError(f"not an expression node: {expr!r}")
