"""
Certifying a discount function
==============================

The quadratic family passes all three conditions, the clipped log ray does not.
"""

import numpy as np

from twm_lab import CanonicalQuadratic, ClippedLogRay, PoolState, SamplerConfig, check_conditions

state = PoolState([1.0, 1.0], [3.0, 1.0], [0.0, 0.0], 0.1)
wstar = np.array([0.5, 0.5])

for F in (CanonicalQuadratic([[2.0, 0.5], [0.5, 1.0]]), ClippedLogRay(anchor_value=2.0)):
    rep = check_conditions(F, state, wstar, SamplerConfig(samples=500, seed=1))
    print(type(F).__name__)
    for c in (rep.c1, rep.c2, rep.c3):
        print(f"  {c.condition}: {'pass' if c.passed else 'fail'}  worst={c.worst:.3g}  {c.detail}")
