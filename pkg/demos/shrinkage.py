"""
No uniform delta shrinkage
==========================

For a discount homogeneous of degree 0, p . grad V_new equals the pool value
plus fees, so no c < 1 can bound every component of the delta by c R.
"""

import numpy as np

from twm_lab import CanonicalQuadratic, PoolState
from twm_lab.theorems import euler_residual, falsify_uniform_shrinkage

F = CanonicalQuadratic(np.eye(2))
state = PoolState([1.0, 1.0], [1.0, 1.0], [1.0, 0.0], 0.1)
wstar = np.array([0.5, 0.5])

print("Euler residual", euler_residual(F, state, wstar, [-0.2, 0.1]))
rep = falsify_uniform_shrinkage(F, wstar, [0.01, 0.5, 0.99], state=state)
for w in rep.witnesses:
    print(f"c={w.extra['c']}: component {w.component} margin {w.margin:.4f} verified {w.extra['verified']}")
print("p . grad V_new at the zero state:", rep.aggregates)
