"""
Arbitrageur best response
=========================

Projected gradient ascent over feasible trades, compared with the closed form.
"""

import numpy as np

from twm_lab import CanonicalQuadratic, PoolState
from twm_lab.discount import random_stiffness, target_rebalance
from twm_lab.solver import solve_arbitrage

rng = np.random.default_rng(3)
state = PoolState(rng.uniform(0.5, 2, 4), rng.uniform(1, 5, 4), np.zeros(4), 0.05)
wstar = np.full(4, 0.25)
F = CanonicalQuadratic(random_stiffness(rng, 4, scale=0.3))

res = solve_arbitrage(F, state, wstar)
print("delta_hat ", res.delta_hat)
print("closed form", target_rebalance(state.prices, wstar, state.reserves))
print("weights after", res.achieved_weights, "iterations", res.iterations, "unique", res.unique)
