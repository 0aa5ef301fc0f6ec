"""
Pool values and their price gradients
=====================================

A two-asset pool off its target weights, valued with and without a discount.
"""

import numpy as np

from twm_lab import CanonicalQuadratic, PoolState
from twm_lab.pool import grad_v_new, grad_v_new_fd, mark_weights, v_new, v_old

state = PoolState(prices=[1.0, 2.0], reserves=[3.0, 1.0], lent=[1.0, 0.5], fee_rate=0.1)
wstar = np.array([0.5, 0.5])
print("weights", mark_weights(state))

# F is zero when nothing is traded, so V_new is the plain value plus fee income
F = CanonicalQuadratic(np.eye(2))
vb = v_new(state, F, wstar)
print("V_old", v_old(state), "V_new", vb.v_new, "F", vb.discount)

# a trade towards the target dilutes the pool value
delta = np.array([-0.5, 0.25])
print("V_new after trade", v_new(state, F, wstar, delta).v_new)

# analytic gradient against central differences
g = grad_v_new(state, F, wstar, delta)
print("grad", g, "fd", grad_v_new_fd(state, F, wstar, delta))
