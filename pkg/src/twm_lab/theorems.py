"""Mechanized checks of the two impossibility results.

Gradient-bound contradiction: no F bounded above by 1 can satisfy
``grad_p F >= 8 f R / (p.R)`` component-wise at every price. Along the segment
p(t) = p1 + (p2 - p1) t with p2 > p1 the gradient theorem gives

    F(p2) - F(p1) >= 8 f ln(p2.R / p1.R),

whose right side is unbounded as p2 grows. :func:`find_claim34_witness` turns
this into a terminating search that returns a concrete violating price.

Uniform shrinkage: when V_new is numeraire invariant, F is homogeneous of
degree 0, so p . grad_p F = 0 and p . grad V_new = p.R / (1 + F) + f p.l.
At any state with F = 0 that aggregate is at least p.R, so no c in (0, 1)
gives grad V_new <= c R. :func:`falsify_uniform_shrinkage` extracts the
offending component and re-checks it by finite differences.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .discount import C1Reading
from .errors import (
    AllReservesZero,
    InvalidInput,
    NondifferentiablePoint,
    NoZeroState,
    PremiseFailure,
    QuadratureAcrossKink,
    SearchBudgetExceeded,
)
from .numdiff import central_gradient
from .pool import PoolState, grad_v_new, grad_v_new_fd, v_new

NUMERAIRE_TOL = 1e-10
_MIN_PIECE_INTERVALS = 64


@dataclass(frozen=True)
class SegmentSpec:
    p1: np.ndarray
    p2: np.ndarray
    quadrature_points: int = 2048  # composite Simpson intervals over [0, 1]

    def __post_init__(self):
        p1 = np.asarray(self.p1, dtype=float)
        p2 = np.asarray(self.p2, dtype=float)
        if p1.shape != p2.shape or p1.ndim != 1:
            raise InvalidInput("segment endpoints must be vectors of one length")
        if np.any(p1 <= 0) or np.any(p2 <= 0):
            raise InvalidInput("segment endpoints must be strictly positive")
        if self.quadrature_points < 2:
            raise InvalidInput("need at least two quadrature intervals")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)

    @property
    def monotone(self):
        """True when p2 >= p1 component-wise."""
        return bool(np.all(self.p2 >= self.p1))

    def at(self, t):
        return self.p1 + (self.p2 - self.p1) * t


class WitnessContext(str, enum.Enum):
    CLAIM34 = "Claim34Violation"
    UNIFORM_SHRINKAGE = "UniformShrinkageViolation"


@dataclass
class Witness:
    """A concrete price certifying that an inequality fails.

    ``margin`` is negative for a violation: ``(grad F - 8 f R / (p.R))_i`` for the
    gradient-bound condition and ``c R_i - (grad V_new)_i`` for uniform shrinkage.
    ``verified_margin`` recomputes it with finite-difference gradients and
    ``verification_residual`` is the absolute gap between the two.
    """

    point: np.ndarray
    component: int  # 0-based
    margin: float
    context: WitnessContext
    verification_residual: float
    verified_margin: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "point": [float(x) for x in self.point],
            "component": int(self.component),
            "margin": float(self.margin),
            "context": self.context.value,
            "verification_residual": float(self.verification_residual),
            "verified_margin": float(self.verified_margin),
            **self.extra,
        }


# -- line integrals ------------------------------------------------------------


def _pieces(signature, refine):
    """Split [0, 1] into intervals on which ``signature(t)`` is constant.

    A change of signature between two nodes is bisected down to ~1e-14 and the
    sliver around the kink is dropped.
    """
    nodes = np.linspace(0.0, 1.0, _MIN_PIECE_INTERVALS + 1)
    sigs = [signature(t) for t in nodes]
    if not refine and any(a != b for a, b in zip(sigs, sigs[1:])):
        raise QuadratureAcrossKink("a kink lies on the segment and refinement is off")

    def split(a, sa, b, sb):
        if sa == sb:
            return [(a, b)]
        if b - a < 1e-14:
            return []
        m = 0.5 * (a + b)
        sm = signature(m)
        return split(a, sa, m, sm) + split(m, sm, b, sb)

    pieces = []
    for a, sa, b, sb in zip(nodes, sigs, nodes[1:], sigs[1:]):
        for lo, hi in split(a, sa, b, sb):
            if pieces and pieces[-1][1] == lo:
                pieces[-1] = (pieces[-1][0], hi)
            else:
                pieces.append((lo, hi))
    return pieces


def _one_sided(integrand, t, lo, hi):
    # a piece endpoint may sit exactly on a kink; take the limit from inside the piece
    try:
        return integrand(t)
    except NondifferentiablePoint:
        if t not in (lo, hi):
            raise
        nudge = 1e-12 * (hi - lo)
        return integrand(t + nudge if t == lo else t - nudge)


def _integrate(integrand, pieces, total_intervals):
    total = 0.0
    for lo, hi in pieces:
        m = max(_MIN_PIECE_INTERVALS, int(np.ceil(total_intervals * (hi - lo))))
        m += m % 2
        t = np.linspace(lo, hi, m + 1)
        values = [_one_sided(integrand, x, lo, hi) for x in t]
        total += simpson(np.array(values), x=t)
    return float(total)


def line_integral_grad(F, seg, wstar, R, delta=None, f=0.1, refine=True):
    """Composite-Simpson value of the line integral of grad_p F along ``seg``.

    Kinks (a change of branch signature of F) are located by bisection and the
    quadrature is split there; with ``refine=False`` a kink raises
    QuadratureAcrossKink.
    """
    R = np.asarray(R, dtype=float)
    delta = np.zeros_like(R) if delta is None else np.asarray(delta, dtype=float)
    direction = seg.p2 - seg.p1

    def signature(t):
        return F.branch_signature(seg.at(t), wstar, R, delta, f)

    def integrand(t):
        return F.grad_p(seg.at(t), wstar, R, delta, f) @ direction

    return _integrate(integrand, _pieces(signature, refine), seg.quadrature_points)


@dataclass(frozen=True)
class BoundIntegral:
    closed_form: float  # 8 f ln(p2.R / p1.R)
    quadrature: float

    @property
    def discrepancy(self):
        return abs(self.closed_form - self.quadrature)


def line_integral_bound(f, R, seg):
    """Line integral of 8 f R / (p.R) along ``seg``, closed form and by quadrature."""
    R = np.asarray(R, dtype=float)
    s1, s2 = seg.p1 @ R, seg.p2 @ R
    if s1 <= 0:
        raise AllReservesZero("p1.R must be positive")
    closed = 8.0 * f * np.log(s2 / s1)
    slope = (seg.p2 - seg.p1) @ R

    def integrand(t):
        return 8.0 * f * slope / (seg.at(t) @ R)

    quad = _integrate(integrand, [(0.0, 1.0)], seg.quadrature_points)
    return BoundIntegral(float(closed), quad)


def monotone_gap(F, seg, wstar, R, delta=None, f=0.1, nodes=257):
    """Check the gradient-bound condition on a node grid and return the integral gap.

    Returns ``(holds, gap)`` where ``holds`` says the condition
    ``grad_p F >= 8 f R / (p.R)`` held at every node and
    ``gap = F(p2) - F(p1) - 8 f ln(p2.R / p1.R)``. When ``holds`` and the
    segment is monotone, the gap is nonnegative.
    """
    R = np.asarray(R, dtype=float)
    delta = np.zeros_like(R) if delta is None else np.asarray(delta, dtype=float)
    holds = True
    for t in np.linspace(0.0, 1.0, nodes):
        p = seg.at(t)
        bound = 8.0 * f * R / (p @ R)
        if np.any(F.grad_p(p, wstar, R, delta, f) < bound - 1e-15 * np.abs(bound)):
            holds = False
            break
    gap = (F.value(seg.p2, wstar, R, delta, f) - F.value(seg.p1, wstar, R, delta, f)
           - 8.0 * f * np.log((seg.p2 @ R) / (seg.p1 @ R)))
    return holds, float(gap)


# -- gradient-bound contradiction --------------------------------------------


@dataclass(frozen=True)
class WitnessConfig:
    max_doublings: int = 60
    initial_grid: int = 16
    max_grid: int = 2**20
    slack: float = 1e-3
    premise_samples: int = 64
    premise_tol: float = 1e-12
    verify_tol: float = 1e-10
    fd_step: float = 1e-6
    seed: int = 0
    candidates_per_grid: int = 8


def _bound_margins(F, p, wstar, R, delta, f):
    return F.grad_p(p, wstar, R, delta, f) - 8.0 * f * R / (p @ R)


def _check_premise(F, p1, wstar, R, delta, f, config):
    rng = np.random.default_rng(config.seed)
    probes = [p1 * 2.0**k for k in range(config.max_doublings + 1)]
    probes += [p1 * np.exp(rng.uniform(-3.0, 3.0, p1.size)) for _ in range(config.premise_samples)]
    for p in probes:
        value = F.value(p, wstar, R, delta, f)
        if value > 1.0 + config.premise_tol:
            raise PremiseFailure(f"F = {value!r} > 1 at p = {p.tolist()}")


def find_claim34_witness(F, state, wstar, p1=None, config=WitnessConfig(), delta=None):
    """Find a price where some component of ``grad_p F - 8 f R / (p.R)`` is negative.

    ``p2 = 2^k p1`` is doubled until ``8 f ln(p2.R / p1.R)`` exceeds
    ``1 - F(p1) + slack``; the gradient theorem then forces a violation on the
    segment, which is located on a grid refined by halving. The returned
    witness is re-verified with finite-difference gradients of F.
    """
    R, f = state.reserves, state.fee_rate
    p1 = state.prices if p1 is None else np.asarray(p1, dtype=float)
    delta = np.zeros(state.n) if delta is None else np.asarray(delta, dtype=float)
    if np.any(p1 <= 0):
        raise InvalidInput("p1 must be strictly positive")
    s1 = p1 @ R
    if s1 <= 0:
        raise AllReservesZero("p1.R must be positive")
    _check_premise(F, p1, wstar, R, delta, f, config)

    f1 = F.value(p1, wstar, R, delta, f)
    gap_curve = []
    for k in range(1, config.max_doublings + 1):
        p2 = p1 * 2.0**k
        bound = 8.0 * f * np.log((p2 @ R) / s1)
        gap_curve.append({
            "k": k,
            "norm_p2": float(np.linalg.norm(p2)),
            "bound": float(bound),
            "gap": float(F.value(p2, wstar, R, delta, f) - f1 - bound),
        })
        if bound > (1.0 - f1) + config.slack:
            break
    else:
        raise SearchBudgetExceeded(
            f"bound stayed below 1 - F(p1) after {config.max_doublings} doublings"
        )

    seg = SegmentSpec(p1, p2)
    grid = config.initial_grid
    while grid <= config.max_grid:
        witness = _scan(F, seg, wstar, R, delta, f, grid, config)
        if witness is not None:
            witness.extra.update({"doublings": k, "grid": grid, "gap_curve": gap_curve})
            return witness
        grid *= 2
    raise SearchBudgetExceeded(f"no verified violation on a grid of {config.max_grid} points")


def _scan(F, seg, wstar, R, delta, f, grid, config):
    candidates = []
    for t in np.linspace(0.0, 1.0, grid + 1):
        p = seg.at(t)
        try:
            margins = _bound_margins(F, p, wstar, R, delta, f)
        except NondifferentiablePoint:
            continue
        i = int(np.argmin(margins))
        if margins[i] < -config.verify_tol:
            candidates.append((margins[i], t, i, p))
    candidates.sort(key=lambda c: (c[0], c[1]))
    for margin, t, i, p in candidates[: config.candidates_per_grid]:
        fd = central_gradient(lambda q: F.value(q, wstar, R, delta, f), p,
                              rel_step=config.fd_step, positive=True)
        verified = fd[i] - 8.0 * f * R[i] / (p @ R)
        residual = abs(verified - margin)
        if verified < -config.verify_tol and residual <= 1e-6 * (1.0 + abs(margin)):
            return Witness(p, i, float(margin), WitnessContext.CLAIM34, float(residual),
                           float(verified), extra={"t": float(t), "p2": seg.p2.tolist()})
    return None


# -- homogeneity and uniform shrinkage ------------------------------------------


def _delta_or_zero(state, delta):
    return np.zeros(state.n) if delta is None else np.asarray(delta, dtype=float)


def euler_residual(F, state, wstar, delta=None):
    """p . grad_p F, zero for F homogeneous of degree 0 in p."""
    delta = _delta_or_zero(state, delta)
    g = F.grad_p(state.prices, wstar, state.reserves, delta, state.fee_rate)
    return float(state.prices @ g)


def euler_scale(F, state, wstar, delta=None):
    """Scale ``1 + ||grad_p F|| ||p||`` against which Euler residuals are judged."""
    delta = _delta_or_zero(state, delta)
    g = F.grad_p(state.prices, wstar, state.reserves, delta, state.fee_rate)
    return 1.0 + np.linalg.norm(g) * np.linalg.norm(state.prices)


@dataclass
class NumeraireReport:
    lambdas: list
    relative_errors: list
    tolerance: float = NUMERAIRE_TOL

    @property
    def max_relative_error(self):
        return max(self.relative_errors)

    @property
    def passed(self):
        return self.max_relative_error <= self.tolerance


def check_numeraire(F, state, wstar, delta=None, lambdas=(0.5, 2.0, 10.0)):
    """Relative error of V_new(lambda p) = lambda V_new(p) for each lambda."""
    delta = _delta_or_zero(state, delta)
    if any(lam <= 0 for lam in lambdas):
        raise InvalidInput("lambdas must be positive")
    base = v_new(state, F, wstar, delta).v_new
    errors = []
    for lam in lambdas:
        scaled = v_new(state.with_prices(lam * state.prices), F, wstar, delta).v_new
        errors.append(abs(scaled - lam * base) / (lam * abs(base)))
    return NumeraireReport(list(lambdas), errors)


def inner_product_identity(F, state, wstar, delta=None):
    """|p . grad V_new - (p.R / (1 + F) + f p.l)|; zero whenever p . grad_p F = 0."""
    delta = _delta_or_zero(state, delta)
    vb = v_new(state, F, wstar, delta)
    lhs = state.prices @ grad_v_new(state, F, wstar, delta)
    return float(abs(lhs - (vb.diluted_value + vb.fee_income)))


@dataclass
class ShrinkageReport:
    c_grid: list
    witnesses: list
    euler_residuals: list
    inner_product_checks: list
    aggregates: list  # p . grad V_new at each zero state
    reading: str
    states: list = field(default_factory=list, repr=False)

    @property
    def all_verified(self):
        return len(self.witnesses) == len(self.c_grid) and all(
            w.extra.get("verified", False) for w in self.witnesses
        )


def random_state(rng, n):
    return PoolState(
        prices=np.exp(rng.uniform(np.log(0.2), np.log(5.0), n)),
        reserves=rng.uniform(0.5, 5.0, n),
        lent=rng.uniform(0.0, 2.0, n),
        fee_rate=rng.uniform(0.01, 0.3),
    )


def zero_state(F, state, wstar, tol=1e-12):
    """A state with F(p, w*, R, 0) = 0, and which reading of C1 produced it.

    Under the strong reading the given state is used as is; otherwise (or if F
    is nonzero there) reserves are rebuilt as R_i = w*_i (p.R) / p_i so the
    pool sits exactly at its target weights.
    """
    wstar = np.asarray(wstar, dtype=float)
    zero = np.zeros(state.n)
    if F.c1_reading is C1Reading.STRONG:
        if abs(F.value(state.prices, wstar, state.reserves, zero, state.fee_rate)) <= tol:
            return state, C1Reading.STRONG
    at_target = state.with_reserves(wstar * (state.prices @ state.reserves) / state.prices)
    if abs(F.value(at_target.prices, wstar, at_target.reserves, zero, at_target.fee_rate)) <= tol:
        return at_target, C1Reading.WEAK
    raise NoZeroState(
        "F is nonzero at delta = 0 under both readings: every entrant is diluted, "
        "so the zero-state assumption of the shrinkage argument is violated"
    )


def falsify_uniform_shrinkage(F, wstar, c_grid, seed=0, state=None, fd_step=1e-6, fd_tol=1e-6):
    """For each c in ``c_grid`` exhibit a component with (grad V_new)_i > c R_i.

    States are drawn from ``seed`` (or ``state`` is reused for every c), moved
    to a zero of F, and the chosen gradient component is re-checked by central
    finite differences of V_new.
    """
    c_grid = [float(c) for c in c_grid]
    bad = [c for c in c_grid if not 0.0 < c < 1.0]
    if bad:
        raise InvalidInput(f"shrinkage factors must lie in (0, 1), got {bad}")
    wstar = np.asarray(wstar, dtype=float)
    rng = np.random.default_rng(seed)
    n = wstar.size
    report = ShrinkageReport(c_grid, [], [], [], [], reading="")
    readings = set()
    for c in c_grid:
        base = state if state is not None else random_state(rng, n)
        zs, reading = zero_state(F, base, wstar)
        readings.add(reading.value)
        grad = grad_v_new(zs, F, wstar)
        margins = c * zs.reserves - grad
        i = int(np.argmin(margins))
        if margins[i] >= 0:
            raise AssertionError(f"no component exceeds c R at c={c}; gradient {grad}")
        fd = grad_v_new_fd(zs, F, wstar, step=fd_step)
        residual = abs(fd[i] - grad[i])
        verified_margin = c * zs.reserves[i] - fd[i]
        verified = residual <= fd_tol * (1.0 + abs(grad[i])) and verified_margin < 0
        report.witnesses.append(Witness(
            zs.prices.copy(), i, float(margins[i]), WitnessContext.UNIFORM_SHRINKAGE,
            float(residual), float(verified_margin),
            extra={"c": c, "verified": bool(verified),
                   "reserves": zs.reserves.tolist(), "reading": reading.value},
        ))
        report.euler_residuals.append(euler_residual(F, zs, wstar))
        report.inner_product_checks.append(inner_product_identity(F, zs, wstar))
        report.aggregates.append(float(zs.prices @ grad))
        report.states.append(zs)
    report.reading = ",".join(sorted(readings))
    return report
