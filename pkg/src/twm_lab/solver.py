"""Arbitrage best response: maximize F over delta subject to R + delta >= 0.

Projected gradient ascent with a Barzilai-Borwein trial step and monotone
Armijo backtracking. Several seeded starts are run so that a flat or
degenerate argmax is reported as non-unique instead of silently picking one.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, MaxIterationsExceeded
from .pool import weights_at


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 10000
    gradient_tolerance: float = 1e-9
    initial_step: float = 1.0
    backtracking_factor: float = 0.5
    armijo_constant: float = 1e-4
    seed: int = 0
    starts: int = 5
    # raise MaxIterationsExceeded instead of returning converged=False
    strict: bool = False

    def __post_init__(self):
        if self.max_iterations <= 0 or self.starts <= 0:
            raise InvalidInput("max_iterations and starts must be positive")
        if self.gradient_tolerance <= 0 or self.initial_step <= 0 or self.armijo_constant <= 0:
            raise InvalidInput("tolerances and steps must be positive")
        if not 0.0 < self.backtracking_factor < 1.0:
            raise InvalidInput("backtracking_factor must lie strictly inside (0, 1)")


@dataclass
class SolveResult:
    delta_hat: np.ndarray
    objective: float
    achieved_weights: np.ndarray
    converged: bool
    iterations: int
    stationarity_residual: float
    unique: bool
    monotone: bool = True
    start_index: int = 0
    runs: list = field(default_factory=list, repr=False)


def project(delta, R):
    """Closest point of {delta : R + delta >= 0}."""
    return np.maximum(delta, -R)


def verify_stationarity(F, state, wstar, delta_hat):
    """``||P(d + grad F(d)) - d||_inf``: zero exactly at a constrained stationary point."""
    delta_hat = np.asarray(delta_hat, dtype=float)
    R = state.reserves
    g = F.grad_delta(state.prices, wstar, R, delta_hat, state.fee_rate)
    return float(np.max(np.abs(project(delta_hat + g, R) - delta_hat)))


@dataclass
class _Run:
    delta: np.ndarray
    objective: float
    converged: bool
    iterations: int
    residual: float
    monotone: bool


def _ascend(F, state, wstar, delta0, config):
    p, R, f = state.prices, state.reserves, state.fee_rate
    beta, sigma = config.backtracking_factor, config.armijo_constant

    delta = project(delta0, R)
    value = F.value(p, wstar, R, delta, f)
    g = F.grad_delta(p, wstar, R, delta, f)
    step = config.initial_step
    monotone = True
    residual = float(np.max(np.abs(project(delta + g, R) - delta)))

    def small(res, d):
        # relative to the iterate: the residual has a roundoff floor near eps * |delta| * |B|
        return res <= config.gradient_tolerance * (1.0 + float(np.max(np.abs(d))))

    for it in range(config.max_iterations):
        if small(residual, delta):
            return _Run(delta, value, True, it, residual, monotone)
        alpha = step
        while True:
            trial = project(delta + alpha * g, R)
            trial_value = F.value(p, wstar, R, trial, f)
            if trial_value >= value + sigma * (g @ (trial - delta)):
                break
            alpha *= beta
            if alpha < 1e-30:
                # no ascent possible at working precision
                return _Run(delta, value, False, it, residual, monotone)
        if trial_value < value:
            monotone = False
        if np.array_equal(trial, delta):
            return _Run(delta, value, small(residual, delta), it, residual, monotone)
        g_new = F.grad_delta(p, wstar, R, trial, f)
        s, y = trial - delta, g_new - g
        curvature = -(s @ y)
        step = (s @ s) / curvature if curvature > 0 else config.initial_step
        step = float(np.clip(step, 1e-12, 1e12))
        delta, value, g = trial, trial_value, g_new
        residual = float(np.max(np.abs(project(delta + g, R) - delta)))
    converged = small(residual, delta)
    return _Run(delta, value, converged, config.max_iterations, residual, monotone)


def _starts(state, config):
    rng = np.random.default_rng(config.seed)
    R = state.reserves
    starts = [np.zeros(state.n)]
    for _ in range(config.starts - 1):
        span = np.maximum(R, 1.0)
        starts.append(-R + rng.uniform(0.0, 1.0, state.n) * (R + span))
    return starts


def solve_arbitrage(F, state, wstar, config=SolverConfig()):
    """Best response ``argmax_delta F(p, w*, R, delta)`` over the feasible box.

    The first start is delta = 0; the result is the best converged run, ties
    broken by the lowest start index. ``unique`` is False when another run
    reaches an equal objective at a distinct point.
    """
    wstar = np.asarray(wstar, dtype=float)
    runs = [_ascend(F, state, wstar, d0, config) for d0 in _starts(state, config)]

    pool = [i for i, r in enumerate(runs) if r.converged] or list(range(len(runs)))
    best_i = max(pool, key=lambda i: (runs[i].objective, -i))
    best = runs[best_i]
    obj_tol = 1e-9 * (1.0 + abs(best.objective))
    pt_tol = 1e-6 * (1.0 + np.max(np.abs(best.delta)))
    unique = True
    for i in pool:
        r = runs[i]
        if i != best_i and abs(r.objective - best.objective) <= obj_tol:
            if np.max(np.abs(r.delta - best.delta)) > pt_tol:
                unique = False

    result = SolveResult(
        delta_hat=best.delta,
        objective=float(best.objective),
        achieved_weights=weights_at(state.prices, state.reserves + best.delta),
        converged=best.converged,
        iterations=best.iterations,
        stationarity_residual=best.residual,
        unique=unique,
        monotone=all(r.monotone for r in runs),
        start_index=best_i,
        runs=runs,
    )
    if not result.converged and config.strict:
        raise MaxIterationsExceeded(
            f"no start converged within {config.max_iterations} iterations", result
        )
    return result
