"""Pool state, mark-to-market weights and the value functions V_old / V_new.

V_old(p) = p.R and V_new(p) = p.R / (1 + F) + f p.l, where F is a discount
function evaluated at (p, w*, R, delta). The analytic delta of V_new is

    grad V_new = R / (1 + F) - S / (1 + F)**2 * grad_p F + f l,   S = p.R

and :func:`grad_v_new_fd` is the finite-difference oracle for it.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import AllReservesZero, DegenerateDiscount, InvalidInput, InvalidPoolState
from .numdiff import central_gradient

SIMPLEX_TOL = 1e-12


def _vector(name, values):
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise InvalidPoolState(f"{name} must be a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidPoolState(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PoolState:
    """Full pool configuration: prices p, reserves R, lent amounts l, fee rate f."""

    prices: np.ndarray
    reserves: np.ndarray
    lent: np.ndarray
    fee_rate: float

    def __post_init__(self):
        p = _vector("prices", self.prices)
        R = _vector("reserves", self.reserves)
        lent = _vector("lent", self.lent)
        if p.size < 1:
            raise InvalidPoolState("pool needs at least one asset")
        if not (p.size == R.size == lent.size):
            raise InvalidPoolState(
                f"length mismatch: prices {p.size}, reserves {R.size}, lent {lent.size}"
            )
        if np.any(p <= 0):
            raise InvalidPoolState("prices must be strictly positive")
        if np.any(R < 0):
            raise InvalidPoolState("reserves must be nonnegative")
        if np.any(lent < 0):
            raise InvalidPoolState("lent amounts must be nonnegative")
        f = float(self.fee_rate)
        if not 0.0 < f < 1.0:
            raise InvalidPoolState(f"fee_rate must lie in (0, 1), got {f}")
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "reserves", R)
        object.__setattr__(self, "lent", lent)
        object.__setattr__(self, "fee_rate", f)

    @property
    def n(self):
        return self.prices.size

    def with_prices(self, prices):
        return replace(self, prices=prices)

    def with_reserves(self, reserves):
        return replace(self, reserves=reserves)


@dataclass(frozen=True)
class ValueBreakdown:
    total_value: float  # S = p.R
    discount: float  # F at the evaluation point
    diluted_value: float  # S / (1 + F)
    fee_income: float  # f p.l
    v_new: float


def as_weights(weights, n=None):
    """Validate a simplex vector and return it as a float array."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or (n is not None and w.size != n):
        raise InvalidInput(f"weight vector must have length {n}, got shape {w.shape}")
    if np.any(w < 0) or np.any(w > 1):
        raise InvalidInput("weights must lie in [0, 1]")
    if abs(w.sum() - 1.0) > 1e-9:
        raise InvalidInput(f"weights must sum to 1, got {w.sum()!r}")
    return w


def mark_weights(state):
    """Mark-to-market weights w_i = p_i R_i / (p.R)."""
    value = state.prices * state.reserves
    total = value.sum()
    if total <= 0:
        raise AllReservesZero("p.R == 0: every asset has zero reserve")
    return value / total


def weights_at(prices, reserves):
    value = np.asarray(prices) * np.asarray(reserves)
    total = value.sum()
    if total <= 0:
        raise AllReservesZero("p.R == 0: every asset has zero reserve")
    return value / total


def v_old(state):
    """V_old = p.R; fee income is deliberately excluded so that grad V_old = R."""
    return float(state.prices @ state.reserves)


def _zero_delta(state, delta):
    if delta is None:
        return np.zeros(state.n)
    return np.asarray(delta, dtype=float)


def v_new(state, F, wstar, delta=None):
    delta = _zero_delta(state, delta)
    p, R = state.prices, state.reserves
    disc = F.value(p, wstar, R, delta, state.fee_rate)
    if 1.0 + disc <= 0:
        raise DegenerateDiscount(f"1 + F = {1.0 + disc!r} <= 0")
    total = float(p @ R)
    diluted = total / (1.0 + disc)
    fees = state.fee_rate * float(p @ state.lent)
    return ValueBreakdown(
        total_value=total,
        discount=float(disc),
        diluted_value=diluted,
        fee_income=fees,
        v_new=diluted + fees,
    )


def grad_v_new(state, F, wstar, delta=None):
    """Analytic gradient of V_new with respect to prices."""
    delta = _zero_delta(state, delta)
    p, R = state.prices, state.reserves
    disc = F.value(p, wstar, R, delta, state.fee_rate)
    if 1.0 + disc <= 0:
        raise DegenerateDiscount(f"1 + F = {1.0 + disc!r} <= 0")
    grad_F = F.grad_p(p, wstar, R, delta, state.fee_rate)
    total = float(p @ R)
    return R / (1.0 + disc) - total / (1.0 + disc) ** 2 * grad_F + state.fee_rate * state.lent


def grad_v_new_fd(state, F, wstar, delta=None, step=1e-6):
    """Central-difference gradient of V_new with relative price steps ``step * p_i``."""
    delta = _zero_delta(state, delta)

    def value_at(prices):
        return v_new(state.with_prices(prices), F, wstar, delta).v_new

    return central_gradient(value_at, state.prices, rel_step=step, positive=True)
