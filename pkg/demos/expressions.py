"""
Discount expressions
====================

Parse, print, evaluate and differentiate a discount written as text.
"""

import numpy as np

from twm_lab import fexpr

expr = fexpr.parse("min(1, 8*f*ln(dot(p,R)/2))")
print(fexpr.pretty(expr))

env = fexpr.make_env(p=[1.0, 1.5], wstar=[0.5, 0.5], R=[1.0, 1.0], delta=[0.0, 0.0], f=0.125)
print("value", fexpr.evaluate(expr, env))
print("grad_p", fexpr.grad(expr, env, "p"))

# errors carry a line and column
for bad in ("dot(p,", "ln(1, 2)", "zeta + 1"):
    try:
        fexpr.parse(bad)
    except fexpr.FexprError as exc:
        print(type(exc).__name__, "-", exc)

# at a tie of min the derivative does not exist
env2 = {**env, "p": np.array([2.0, 2.0])}
try:
    fexpr.grad(fexpr.parse("min(p[1], p[2])"), env2, "p")
except fexpr.NondifferentiableExpr as exc:
    print("kink:", exc)
