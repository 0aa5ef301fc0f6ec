"""Verification laboratory for target-weight mechanisms in perpetual demand lending pools."""

__version__ = "0.1.0"

from .discount import (
    C1Reading,
    CanonicalQuadratic,
    ClippedLogRay,
    ConstantZero,
    DiscountFunction,
    DslExpression,
    SamplerConfig,
    check_c1,
    check_c2_concavity,
    check_c3_target,
    check_conditions,
    eval_discount,
    grad_discount_delta,
    grad_discount_p,
    target_rebalance,
)
from .pool import PoolState, ValueBreakdown, grad_v_new, grad_v_new_fd, mark_weights, v_new, v_old
from .solver import SolveResult, SolverConfig, solve_arbitrage, verify_stationarity
from .theorems import (
    SegmentSpec,
    ShrinkageReport,
    Witness,
    WitnessConfig,
    check_numeraire,
    euler_residual,
    falsify_uniform_shrinkage,
    find_claim34_witness,
    inner_product_identity,
    line_integral_bound,
    line_integral_grad,
)
