"""Discount functions F(p, w*, R, delta) and randomized checkers for C1, C2, C3.

Built-in families:

* :class:`CanonicalQuadratic` -- ``F = d*'B delta - delta'B delta / 2`` with the
  value-preserving target rebalance ``d*_i = (p.R) w*_i / p_i - R_i``. This
  equals ``d*'B d*/2 - (delta-d*)'B(delta-d*)/2``, is zero at delta = 0,
  concave in delta, maximized at d*, and homogeneous of degree 0 in p.
* :class:`ClippedLogRay` -- ``F = min(cap, 8 f ln(p.R / v0))``, which meets the
  gradient bound ``grad_p F >= 8 f R / (p.R)`` with equality below the clip.
* :class:`ConstantZero` -- ``F = 0``.
* :class:`DslExpression` -- any expression of the :mod:`twm_lab.fexpr` language.

The fee rate ``f`` is passed to every evaluation because the log-ray family
and DSL expressions depend on it.
"""

import enum
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from . import fexpr
from .errors import InfeasibleDelta, InvalidInput, NondifferentiablePoint

C1_TOL = 1e-10
C2_TOL = 1e-9
C3_TOL = 1e-6


class C1Reading(str, enum.Enum):
    STRONG = "strong"  # F(p, w*, R, 0) = 0 for every state
    WEAK = "weak"  # F(p, w*, R, 0) = 0 only where w(p, R) = w*


class DiscountFunction(ABC):
    """Evaluable F(p, w*, R, delta; f) with gradients in p and delta."""

    kind = None
    #: True when F is homogeneous of degree 0 in p by construction, None if unknown.
    degree0 = None
    #: Required dimension n, or None when any n is accepted.
    dim = None

    def __init__(self, c1_reading=C1Reading.STRONG):
        self.c1_reading = C1Reading(c1_reading)

    def _check(self, p, wstar, R, delta):
        p = np.asarray(p, dtype=float)
        R = np.asarray(R, dtype=float)
        delta = np.asarray(delta, dtype=float)
        wstar = np.asarray(wstar, dtype=float)
        n = p.size
        if not (R.size == delta.size == wstar.size == n):
            raise InvalidInput("p, w*, R and delta must share one length")
        if self.dim is not None and n != self.dim:
            raise InvalidInput(f"{self.kind} is defined for n={self.dim}, got n={n}")
        if np.any(p <= 0):
            raise InvalidInput("prices must be strictly positive")
        if np.any(R + delta < 0):
            raise InfeasibleDelta(f"R + delta has a negative component: {R + delta}")
        return p, wstar, R, delta

    def value(self, p, wstar, R, delta, f):
        return float(self._value(*self._check(p, wstar, R, delta), float(f)))

    def grad_p(self, p, wstar, R, delta, f):
        return np.asarray(self._grad_p(*self._check(p, wstar, R, delta), float(f)), dtype=float)

    def grad_delta(self, p, wstar, R, delta, f):
        return np.asarray(
            self._grad_delta(*self._check(p, wstar, R, delta), float(f)), dtype=float
        )

    def branch_signature(self, p, wstar, R, delta, f):
        """Identifies the smooth piece containing the point; empty for smooth F."""
        return ()

    @abstractmethod
    def _value(self, p, wstar, R, delta, f): ...

    @abstractmethod
    def _grad_p(self, p, wstar, R, delta, f): ...

    @abstractmethod
    def _grad_delta(self, p, wstar, R, delta, f): ...

    @abstractmethod
    def to_spec(self):
        """Serializable record, the inverse of :func:`twm_lab.scenario.discount_from_spec`."""

    def scaled(self, factor):
        raise InvalidInput(f"{self.kind} has no stiffness to scale")

    def __repr__(self):
        return f"{type(self).__name__}({self.to_spec()})"


def target_rebalance(p, wstar, R):
    """Value-preserving rebalance d* with p.(R + d*) = p.R and w(p, R + d*) = w*."""
    p = np.asarray(p, dtype=float)
    return (p @ R) * np.asarray(wstar, dtype=float) / p - np.asarray(R, dtype=float)


class CanonicalQuadratic(DiscountFunction):
    kind = "canonical_quadratic"
    degree0 = True

    def __init__(self, stiffness, c1_reading=C1Reading.STRONG):
        super().__init__(c1_reading)
        B = np.array(stiffness, dtype=float)
        if B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise InvalidInput(f"stiffness must be square, got shape {B.shape}")
        if not np.allclose(B, B.T, rtol=0, atol=1e-12 * max(1.0, np.abs(B).max())):
            raise InvalidInput("stiffness must be symmetric")
        if np.linalg.eigvalsh(B).min() <= 0:
            raise InvalidInput("stiffness must be positive definite")
        B.setflags(write=False)
        self.stiffness = B
        self.dim = B.shape[0]

    def _value(self, p, wstar, R, delta, f):
        d_star = target_rebalance(p, wstar, R)
        Bdelta = self.stiffness @ delta
        return d_star @ Bdelta - 0.5 * (delta @ Bdelta)

    def _grad_p(self, p, wstar, R, delta, f):
        g = self.stiffness @ delta
        total = p @ R
        return R * np.sum(wstar * g / p) - total * wstar * g / p**2

    def _grad_delta(self, p, wstar, R, delta, f):
        return -self.stiffness @ (delta - target_rebalance(p, wstar, R))

    def to_spec(self):
        return {
            "kind": self.kind,
            "stiffness": self.stiffness.tolist(),
            "c1_reading": self.c1_reading.value,
        }

    def scaled(self, factor):
        return CanonicalQuadratic(self.stiffness * factor, self.c1_reading)


class ClippedLogRay(DiscountFunction):
    kind = "clipped_log_ray"
    degree0 = False

    def __init__(self, anchor_value, cap=1.0, c1_reading=C1Reading.STRONG):
        super().__init__(c1_reading)
        if anchor_value <= 0:
            raise InvalidInput("anchor_value must be positive")
        self.anchor_value = float(anchor_value)
        self.cap = float(cap)

    def _log_term(self, p, R, f):
        total = p @ R
        if total <= 0:
            raise InvalidInput("clipped log ray needs p.R > 0")
        return 8.0 * f * np.log(total / self.anchor_value)

    def kink_value(self, f):
        """Pool value p.R at which the clip engages."""
        return self.anchor_value * np.exp(self.cap / (8.0 * f))

    def _value(self, p, wstar, R, delta, f):
        return min(self.cap, self._log_term(p, R, f))

    def _grad_p(self, p, wstar, R, delta, f):
        log_term = self._log_term(p, R, f)
        if log_term == self.cap:
            raise NondifferentiablePoint("clipped log ray evaluated exactly on its clip")
        if log_term > self.cap:
            return np.zeros_like(p)
        return 8.0 * f * R / (p @ R)

    def _grad_delta(self, p, wstar, R, delta, f):
        return np.zeros_like(delta)

    def branch_signature(self, p, wstar, R, delta, f):
        p, _, R, _ = self._check(p, wstar, R, delta)
        return (bool(self._log_term(p, R, f) < self.cap),)

    def to_spec(self):
        return {
            "kind": self.kind,
            "anchor_value": self.anchor_value,
            "cap": self.cap,
            "c1_reading": self.c1_reading.value,
        }


class ConstantZero(DiscountFunction):
    kind = "constant_zero"
    degree0 = True

    def _value(self, p, wstar, R, delta, f):
        return 0.0

    def _grad_p(self, p, wstar, R, delta, f):
        return np.zeros_like(p)

    def _grad_delta(self, p, wstar, R, delta, f):
        return np.zeros_like(delta)

    def to_spec(self):
        return {"kind": self.kind, "c1_reading": self.c1_reading.value}


class DslExpression(DiscountFunction):
    kind = "dsl"

    def __init__(self, source, c1_reading=C1Reading.STRONG):
        super().__init__(c1_reading)
        self.source = source
        self.expr = fexpr.parse(source)

    def _env(self, p, wstar, R, delta, f):
        return fexpr.make_env(p, wstar, R, delta, f)

    def _value(self, *args):
        return fexpr.evaluate(self.expr, self._env(*args))

    def _grad_p(self, *args):
        return fexpr.grad(self.expr, self._env(*args), "p")

    def _grad_delta(self, *args):
        return fexpr.grad(self.expr, self._env(*args), "delta")

    def branch_signature(self, p, wstar, R, delta, f):
        return fexpr.branch_signature(self.expr, self._env(*self._check(p, wstar, R, delta), f))

    def to_spec(self):
        return {"kind": self.kind, "expression": self.source, "c1_reading": self.c1_reading.value}


def eval_discount(F, p, wstar, R, delta, f):
    return F.value(p, wstar, R, delta, f)


def grad_discount_p(F, p, wstar, R, delta, f):
    return F.grad_p(p, wstar, R, delta, f)


def grad_discount_delta(F, p, wstar, R, delta, f):
    return F.grad_delta(p, wstar, R, delta, f)


def random_stiffness(rng, n, scale=1.0):
    """Well-conditioned random symmetric positive-definite matrix."""
    A = rng.normal(size=(n, n))
    return scale * (A @ A.T / n + np.eye(n))


# -- condition checkers ------------------------------------------------------


@dataclass(frozen=True)
class SamplerConfig:
    samples: int = 1000
    seed: int = 0
    n: int = 2  # ignored when F fixes its own dimension
    price_range: tuple = (0.1, 10.0)  # log-uniform
    reserve_range: tuple = (0.0, 10.0)
    fee_range: tuple = (0.01, 0.3)
    delta_scale: float = 1.0

    def __post_init__(self):
        if self.samples <= 0:
            raise InvalidInput("samples must be positive")


@dataclass
class ConditionCheck:
    """One fragment of a ConditionReport."""

    condition: str
    passed: bool
    worst: float  # C1: max |F(.,0)|; C2: worst midpoint shortfall; C3: weight error
    samples_used: int
    seed: int
    reading: str = ""
    detail: str = ""
    extra: dict = field(default_factory=dict)


@dataclass
class ConditionReport:
    c1: ConditionCheck
    c2: ConditionCheck
    c3: ConditionCheck

    @property
    def all_pass(self):
        return self.c1.passed and self.c2.passed and self.c3.passed


def _log_uniform(rng, lo_hi, size):
    lo, hi = lo_hi
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def check_c1(F, config=SamplerConfig()):
    """Max |F(p, w*, R, 0)| over sampled states; pass iff <= 1e-10.

    Under the weak reading every sampled state is built with w(p, R) = w* by
    setting R_i = w*_i c / p_i.
    """
    rng = np.random.default_rng(config.seed)
    n = F.dim or config.n
    worst, worst_at = 0.0, None
    for _ in range(config.samples):
        p = _log_uniform(rng, config.price_range, n)
        wstar = rng.dirichlet(np.ones(n))
        if F.c1_reading is C1Reading.WEAK:
            R = wstar * rng.uniform(1.0, 100.0) / p
        else:
            R = rng.uniform(*config.reserve_range, n)
            if p @ R <= 0:
                R[0] = 1.0
        f = rng.uniform(*config.fee_range)
        residual = abs(F.value(p, wstar, R, np.zeros(n), f))
        if residual > worst:
            worst, worst_at = residual, (p, R)
    passed = worst <= C1_TOL
    detail = "F vanishes at delta = 0 on every sample"
    if not passed:
        p, R = worst_at
        detail = f"F(p, w*, R, 0) = {worst:.6g} at p={p.tolist()}, R={R.tolist()}"
    return ConditionCheck("C1", passed, worst, config.samples, config.seed,
                          reading=F.c1_reading.value, detail=detail)


def _feasible_delta(rng, R, scale):
    span = np.maximum(R, 1.0) * scale
    return -R + rng.uniform(0.0, 1.0, R.size) * (R + span)


def check_c2_concavity(F, state, wstar, config=SamplerConfig()):
    """Randomized midpoint-concavity test in delta over the feasible box R + delta >= 0."""
    rng = np.random.default_rng(config.seed)
    p, R, f = state.prices, state.reserves, state.fee_rate
    worst = -np.inf
    for _ in range(config.samples):
        da = _feasible_delta(rng, R, config.delta_scale)
        db = _feasible_delta(rng, R, config.delta_scale)
        mid = F.value(p, wstar, R, 0.5 * (da + db), f)
        chord = 0.5 * (F.value(p, wstar, R, da, f) + F.value(p, wstar, R, db, f))
        worst = max(worst, chord - mid)
    passed = worst <= C2_TOL
    detail = "no midpoint violation" if passed else f"midpoint shortfall {worst:.6g}"
    return ConditionCheck("C2", passed, float(max(worst, 0.0)), config.samples, config.seed,
                          detail=detail, extra={"signed_worst": float(worst)})


def check_c3_target(F, state, wstar, solver_config=None):
    """Solve for the arbitrage optimum and compare the achieved weights with w*.

    Passes only when the optimum is unique and ``||w(p, R + d) - w*||_inf <= 1e-6``.
    """
    from .solver import SolverConfig, solve_arbitrage

    solver_config = solver_config or SolverConfig()
    result = solve_arbitrage(F, state, wstar, solver_config)
    err = float(np.max(np.abs(result.achieved_weights - np.asarray(wstar))))
    passed = result.converged and result.unique and err <= C3_TOL
    if not result.unique:
        detail = "argmax is not unique: distinct optima with equal objective"
    elif not result.converged:
        detail = f"solver did not converge in {result.iterations} iterations"
    elif err > C3_TOL:
        detail = f"achieved weights miss the target by {err:.6g}"
    else:
        detail = "argmax reaches the target weights"
    return ConditionCheck("C3", passed, err, solver_config.starts, solver_config.seed,
                          detail=detail,
                          extra={"delta_hat": result.delta_hat.tolist(),
                                 "unique": result.unique,
                                 "converged": result.converged})


def check_conditions(F, state, wstar, sampler=SamplerConfig(), solver_config=None):
    return ConditionReport(
        c1=check_c1(F, sampler),
        c2=check_c2_concavity(F, state, wstar, sampler),
        c3=check_c3_target(F, state, wstar, solver_config),
    )


__all__ = [
    "C1Reading",
    "CanonicalQuadratic",
    "ClippedLogRay",
    "ConditionCheck",
    "ConditionReport",
    "ConstantZero",
    "DiscountFunction",
    "DslExpression",
    "SamplerConfig",
    "check_c1",
    "check_c2_concavity",
    "check_c3_target",
    "check_conditions",
    "eval_discount",
    "grad_discount_delta",
    "grad_discount_p",
    "random_stiffness",
    "target_rebalance",
]
