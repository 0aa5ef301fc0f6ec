"""Evaluation and forward-mode differentiation of expression trees.

Every intermediate value is a :class:`Dual`: a value (scalar or length-n
vector) together with its tangents along ``m`` seed directions. Plain
evaluation uses ``m = 0``; a gradient with respect to p or delta seeds the n
unit directions of that vector and recovers the whole gradient in one sweep.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, IndexOutOfRange, NondifferentiableExpr, ShapeError
from .nodes import VECTORS, Index, Var, walk

TARGETS = ("p", "delta")


@dataclass(frozen=True)
class Dual:
    """Value with tangents; ``der.shape == val.shape + (m,)``."""

    val: np.ndarray
    der: np.ndarray

    @property
    def is_vector(self):
        return self.val.ndim == 1


def make_env(p, wstar, R, delta, f):
    env = {
        "p": np.asarray(p, dtype=float),
        "wstar": np.asarray(wstar, dtype=float),
        "R": np.asarray(R, dtype=float),
        "delta": np.asarray(delta, dtype=float),
    }
    sizes = {k: v.size for k, v in env.items()}
    if len(set(sizes.values())) != 1:
        raise ShapeError(f"environment vectors disagree in length: {sizes}")
    env["f"] = float(f)
    return env


class _Evaluator:
    def __init__(self, env, target=None, trace=None):
        self.env = env
        self.n = env["p"].size
        self.m = self.n if target is not None else 0
        self.target = target
        self.trace = trace

    @property
    def tracking(self):
        return self.m > 0

    def seed(self, name):
        if name == self.target:
            return np.eye(self.n)
        return np.zeros((self.n, self.m))

    def run(self, node):
        method = getattr(self, "_" + type(node).__name__.lower())
        out = method(node)
        if not np.all(np.isfinite(out.val)):
            raise DomainError("non-finite result (overflow)", node.pos)
        return out

    def _num(self, node):
        return Dual(np.array(node.value), np.zeros(self.m))

    def _var(self, node):
        if node.name == "f":
            return Dual(np.array(self.env["f"]), np.zeros(self.m))
        return Dual(self.env[node.name], self.seed(node.name))

    def _index(self, node):
        if node.index > self.n:
            raise IndexOutOfRange(
                f"{node.name}[{node.index}] exceeds dimension n={self.n}", node.pos
            )
        i = node.index - 1
        return Dual(np.array(self.env[node.name][i]), self.seed(node.name)[i])

    def _neg(self, node):
        a = self.run(node.operand)
        return Dual(-a.val, -a.der)

    def _binop(self, node):
        a = self.run(node.left)
        b = self.run(node.right)
        op = node.op
        if op == "+":
            return Dual(a.val + b.val, a.der + b.der)
        if op == "-":
            return Dual(a.val - b.val, a.der - b.der)
        if op == "*":
            return Dual(a.val * b.val, a.der * _col(b.val) + b.der * _col(a.val))
        if op == "/":
            if np.any(b.val == 0):
                raise DomainError("division by zero", node.pos, "/")
            q = a.val / b.val
            return Dual(q, (a.der - b.der * _col(q)) / _col(b.val))
        return self._power(node, a, b)

    def _power(self, node, a, b):
        x, y = a.val, b.val
        const_exp = not np.any(b.der)
        if np.any(x < 0) and not (const_exp and np.all(np.equal(np.mod(y, 1), 0))):
            raise DomainError("negative base needs a constant integer exponent", node.pos, "^")
        if np.any((x == 0) & (y <= 0)):
            raise DomainError("zero raised to a nonpositive power", node.pos, "^")
        val = np.power(x, y)
        if not self.tracking:
            return Dual(val, np.zeros(val.shape + (0,)))
        if const_exp:
            if np.any((x == 0) & (y < 1) & np.any(a.der != 0, axis=-1)):
                raise NondifferentiableExpr("infinite slope of x^y at x=0", node.pos, "^")
            with np.errstate(divide="ignore", invalid="ignore"):
                slope = np.where(x == 0, np.where(y == 1, 1.0, 0.0), y * np.power(x, y - 1))
            return Dual(val, a.der * _col(slope) + np.zeros_like(b.der))
        if np.any(x <= 0):
            raise NondifferentiableExpr("variable exponent needs a positive base", node.pos, "^")
        der = _col(val) * (b.der * _col(np.log(x)) + a.der * _col(y / x))
        return Dual(val, der)

    def _call(self, node):
        args = [self.run(a) for a in node.args]
        return getattr(self, "_fn_" + node.func)(node, *args)

    def _fn_ln(self, node, a):
        if np.any(a.val <= 0):
            raise DomainError("ln of a nonpositive value", node.pos, "ln")
        return Dual(np.log(a.val), a.der / _col(a.val))

    def _fn_exp(self, node, a):
        with np.errstate(over="ignore"):
            e = np.exp(a.val)
        return Dual(e, a.der * _col(e))

    def _fn_sqrt(self, node, a):
        if np.any(a.val < 0):
            raise DomainError("sqrt of a negative value", node.pos, "sqrt")
        s = np.sqrt(a.val)
        if not self.tracking:
            return Dual(s, np.zeros(s.shape + (0,)))
        zero = s == 0
        if np.any(zero & np.any(a.der != 0, axis=-1)):
            raise NondifferentiableExpr("sqrt is not differentiable at 0", node.pos, "sqrt")
        with np.errstate(divide="ignore", invalid="ignore"):
            slope = np.where(zero, 0.0, 0.5 / s)
        return Dual(s, a.der * _col(slope))

    def _fn_abs(self, node, a):
        sign = np.sign(a.val)
        if self.tracking and np.any((sign == 0) & np.any(a.der != 0, axis=-1)):
            raise NondifferentiableExpr("abs is not differentiable at 0", node.pos, "abs")
        self._record(a.val >= 0)
        return Dual(np.abs(a.val), a.der * _col(sign))

    def _select(self, node, a, b, pick_a):
        pick = np.asarray(pick_a)
        if self.tracking:
            tie = a.val == b.val
            differ = np.any(a.der != b.der, axis=-1)
            if np.any(tie & differ):
                raise NondifferentiableExpr(f"{node.func} tie", node.pos, node.func)
        self._record(pick)
        return Dual(np.where(pick, a.val, b.val), np.where(pick[..., None], a.der, b.der))

    def _fn_min(self, node, a, b):
        return self._select(node, a, b, a.val <= b.val)

    def _fn_max(self, node, a, b):
        return self._select(node, a, b, a.val >= b.val)

    def _fn_dot(self, node, a, b):
        prod = Dual(a.val * b.val, a.der * _col(b.val) + b.der * _col(a.val))
        return Dual(np.array(prod.val.sum()), prod.der.sum(axis=0))

    def _fn_sum(self, node, a):
        return Dual(np.array(a.val.sum()), a.der.sum(axis=0))

    def _fn_norm2(self, node, a):
        norm = np.sqrt(np.sum(a.val * a.val))
        if norm == 0:
            if self.tracking and np.any(a.der != 0):
                raise NondifferentiableExpr("norm2 is not differentiable at 0", node.pos, "norm2")
            return Dual(np.array(0.0), np.zeros(self.m))
        return Dual(np.array(norm), (a.der * _col(a.val)).sum(axis=0) / norm)

    def _record(self, mask):
        if self.trace is not None:
            self.trace.append(tuple(np.atleast_1d(mask).tolist()))


def _col(val):
    return np.asarray(val)[..., None]


def _check_target(target):
    if target not in TARGETS:
        raise ValueError(f"gradient target must be one of {TARGETS}, got {target!r}")


def evaluate(expr, env):
    """Evaluate ``expr`` to a float; raises DomainError on domain violations."""
    return float(_Evaluator(env).run(expr).val)


def value_and_grad(expr, env, target):
    _check_target(target)
    out = _Evaluator(env, target=target).run(expr)
    return float(out.val), np.array(out.der, dtype=float)


def grad(expr, env, target):
    """Gradient of ``expr`` with respect to the vector ``target`` ("p" or "delta")."""
    return value_and_grad(expr, env, target)[1]


def branch_signature(expr, env):
    """Which branch every min/max/abs took; changes between two points flag a kink."""
    trace = []
    _Evaluator(env, trace=trace).run(expr)
    return tuple(trace)


def uses(expr, name):
    """True when ``expr`` refers to the variable ``name`` anywhere."""
    return any(isinstance(node, (Var, Index)) and node.name == name for node in walk(expr))


__all__ = [
    "Dual",
    "TARGETS",
    "VECTORS",
    "branch_signature",
    "evaluate",
    "grad",
    "make_env",
    "uses",
    "value_and_grad",
]
