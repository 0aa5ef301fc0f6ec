"""Seeded random expression corpus for round-trip and autodiff property checks."""

import numpy as np

from .errors import FexprError
from .evaluate import grad, make_env
from .nodes import BinOp, Call, Index, Neg, Num, Var, depth

_VECS = ("p", "R", "wstar")


def _literal(rng):
    return Num(float(rng.choice([0.5, 1.0, 2.0, 3.0, 0.25, 1.5])))


def _positive(rng, n, d):
    """An expression that is strictly positive whenever p, R, wstar, f are."""
    if d <= 0 or rng.random() < 0.25:
        pick = rng.integers(4)
        if pick == 0:
            return _literal(rng)
        if pick == 1:
            return Var("f")
        return Index(str(rng.choice(_VECS)), int(rng.integers(1, n + 1)))
    kind = rng.integers(9)
    if kind in (0, 1):
        return BinOp(str(rng.choice(["+", "*"])), _positive(rng, n, d - 1), _positive(rng, n, d - 1))
    if kind == 2:
        return BinOp("/", _positive(rng, n, d - 1), _positive(rng, n, d - 1))
    if kind == 3:
        return Call("sqrt", (_positive(rng, n, d - 1),))
    if kind == 4:
        return BinOp("^", _positive(rng, n, 0), Num(float(rng.choice([2.0, 0.5, 3.0]))))
    if kind == 5:
        a, b = rng.choice(_VECS, size=2)
        return Call("dot", (Var(str(a)), Var(str(b))))
    if kind == 6:
        return Call(str(rng.choice(["sum", "norm2"])), (Var(str(rng.choice(_VECS))),))
    if kind == 7:
        return Call("exp", (Call("ln", (_positive(rng, n, d - 1),)),))
    return Call(str(rng.choice(["min", "max"])), (_positive(rng, n, d - 1), _positive(rng, n, d - 1)))


def _any(rng, n, d):
    if d <= 0 or rng.random() < 0.2:
        if rng.random() < 0.3:
            return Index("delta", int(rng.integers(1, n + 1)))
        return _positive(rng, n, 0)
    kind = rng.integers(7)
    if kind == 0:
        return BinOp(str(rng.choice(["+", "-"])), _any(rng, n, d - 1), _any(rng, n, d - 1))
    if kind == 1:
        return BinOp("*", _any(rng, n, d - 1), _any(rng, n, d - 1))
    if kind == 2:
        return BinOp("/", _any(rng, n, d - 1), _positive(rng, n, d - 1))
    if kind == 3:
        return Neg(_any(rng, n, d - 1))
    if kind == 4:
        return Call("ln", (_positive(rng, n, d - 1),))
    if kind == 5:
        return Call("abs", (_any(rng, n, d - 1),))
    return _positive(rng, n, d)


def random_env(rng, n):
    return make_env(
        p=rng.uniform(0.5, 3.0, n),
        wstar=rng.dirichlet(np.ones(n)),
        R=rng.uniform(0.5, 3.0, n),
        delta=rng.uniform(-1.0, 1.0, n),
        f=rng.uniform(0.01, 0.3),
    )


def random_expression(rng, n, max_depth=6):
    while True:
        expr = _any(rng, n, max_depth - 1)
        if depth(expr) <= max_depth:
            return expr


def expression_corpus(count=50, n=3, max_depth=6, envs_per_expr=10, seed=0):
    """Draw ``count`` expressions, each paired with environments where it is finite.

    Expressions failing to evaluate cleanly at any of their environments are
    redrawn, so the corpus is deterministic in ``seed``.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    while len(corpus) < count:
        expr = random_expression(rng, n, max_depth)
        envs = [random_env(rng, n) for _ in range(envs_per_expr)]
        try:
            for env in envs:
                for target in ("p", "delta"):
                    g = grad(expr, env, target)
                    if not np.all(np.isfinite(g)) or np.max(np.abs(g)) > 1e6:
                        raise FexprError("gradient too large for a finite-difference check")
        except FexprError:
            continue
        corpus.append((expr, envs))
    return corpus
