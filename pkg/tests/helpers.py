"""Seeded case generators shared by the test modules."""

import numpy as np

from twm_lab import fexpr
from twm_lab.discount import CanonicalQuadratic, ClippedLogRay, ConstantZero, random_stiffness, target_rebalance
from twm_lab.numdiff import central_gradient
from twm_lab.pool import PoolState

KINK_MARGIN = 1e-4


def random_pool(rng, n, lent=True):
    return PoolState(
        prices=np.exp(rng.uniform(np.log(0.2), np.log(5.0), n)),
        reserves=rng.uniform(0.5, 5.0, n),
        lent=rng.uniform(0.0, 2.0, n) if lent else np.zeros(n),
        fee_rate=rng.uniform(0.01, 0.3),
    )


def interior_delta(rng, state, wstar):
    """A feasible delta on the segment from 0 towards the target rebalance."""
    d_star = target_rebalance(state.prices, wstar, state.reserves)
    return rng.uniform(0.05, 0.95) * d_star


def quadratic_case(rng, n=None):
    n = n or int(rng.integers(2, 6))
    state = random_pool(rng, n)
    wstar = rng.dirichlet(np.ones(n))
    F = CanonicalQuadratic(random_stiffness(rng, n, scale=rng.uniform(0.05, 0.5)))
    delta = interior_delta(rng, state, wstar)
    return F, state, wstar, delta


def log_ray_case(rng, n=None):
    """ClippedLogRay with the state on a random side of the clip, away from the kink."""
    n = n or int(rng.integers(2, 6))
    while True:
        state = random_pool(rng, n)
        wstar = rng.dirichlet(np.ones(n))
        total = state.prices @ state.reserves
        log_term = rng.uniform(-0.8, 0.8)
        F = ClippedLogRay(total * np.exp(-log_term / (8 * state.fee_rate)), cap=0.4)
        if abs(log_term / F.cap - 1.0) > KINK_MARGIN:
            return F, state, wstar, np.zeros(n)


def zero_case(rng, n=None):
    n = n or int(rng.integers(2, 6))
    state = random_pool(rng, n)
    wstar = rng.dirichlet(np.ones(n))
    return ConstantZero(), state, wstar, interior_delta(rng, state, wstar)


CASES = {"canonical_quadratic": quadratic_case, "clipped_log_ray": log_ray_case,
         "constant_zero": zero_case}


def dsl_fd_mismatch(expr, env, target, rel_step=1e-6):
    """Relative autodiff-vs-central-difference mismatch, or None near a kink."""
    x0 = env[target]
    positive = target == "p"

    def at(x):
        return {**env, target: x}

    base_sig = fexpr.branch_signature(expr, env)
    steps = rel_step * (x0 if positive else np.maximum(np.abs(x0), 1.0))
    for i, h in enumerate(steps):
        for sign in (1, -1):
            x = x0.copy()
            x[i] += sign * h
            if fexpr.branch_signature(expr, at(x)) != base_sig:
                return None
    ad = fexpr.grad(expr, env, target)
    fd = central_gradient(lambda x: fexpr.evaluate(expr, at(x)), x0, rel_step, positive=positive)
    return float(np.max(np.abs(ad - fd)) / (1.0 + np.max(np.abs(ad))))
