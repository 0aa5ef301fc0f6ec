"""Acceptance suite: one group of tests per criterion, each tagged with its number.

The terminal summary prints a PASS/FAIL line per criterion (see conftest.py).
"""

import json
import math
from pathlib import Path

import numpy as np
import pytest

from helpers import CASES, dsl_fd_mismatch, log_ray_case, quadratic_case, random_pool
from twm_lab import fexpr
from twm_lab.cli import main
from twm_lab.discount import (
    C1Reading,
    CanonicalQuadratic,
    ClippedLogRay,
    ConstantZero,
    DslExpression,
    SamplerConfig,
    check_c1,
    check_c2_concavity,
    check_c3_target,
    random_stiffness,
    target_rebalance,
)
from twm_lab.fexpr.corpus import expression_corpus
from twm_lab.fexpr.printer import format_number
from twm_lab.pool import PoolState, grad_v_new, grad_v_new_fd, v_new
from twm_lab.report import RunReport, strip_timing
from twm_lab.solver import solve_arbitrage
from twm_lab.theorems import (
    SegmentSpec,
    euler_residual,
    falsify_uniform_shrinkage,
    find_claim34_witness,
    inner_product_identity,
    line_integral_bound,
    line_integral_grad,
)

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
E = math.e
C_GRID = [0.01, 0.1, 0.5, 0.9, 0.99]


def crit(number, title):
    return pytest.mark.criterion(number, title)


def _dsl_log_ray_case(rng):
    F, state, wstar, delta = log_ray_case(rng)
    src = f"min({format_number(F.cap)}, 8*f*ln(dot(p, R)/{format_number(F.anchor_value)}))"
    return DslExpression(src), state, wstar, delta


FAMILIES = {**CASES, "dsl": _dsl_log_ray_case}


def _segments(family, seed, count=20):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        F, state, wstar, delta = FAMILIES[family](rng)
        p2 = state.prices * np.exp(rng.uniform(-1.0, 1.5, state.n))
        yield F, state, wstar, delta, SegmentSpec(state.prices, p2)


# -- 1 ------------------------------------------------------------------------


@crit(1, "gradient theorem: line integral of grad F equals F(p2) - F(p1)")
@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_c01_gradient_theorem(family):
    for F, s, w, d, seg in _segments(family, seed=101):
        exact = F.value(seg.p2, w, s.reserves, d, s.fee_rate) - F.value(seg.p1, w, s.reserves, d, s.fee_rate)
        got = line_integral_grad(F, seg, w, s.reserves, d, s.fee_rate)
        assert abs(got - exact) <= 1e-6 * (1 + abs(exact)), (family, got, exact)


# -- 2 ------------------------------------------------------------------------


@crit(2, "closed-form bound 8 f ln(p2.R / p1.R) and its spot value")
@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_c02_bound_quadrature(family):
    for F, s, w, d, seg in _segments(family, seed=101):
        b = line_integral_bound(s.fee_rate, s.reserves, seg)
        assert b.discrepancy <= 1e-8


@crit(2, "closed-form bound 8 f ln(p2.R / p1.R) and its spot value")
def test_c02_spot_value():
    b = line_integral_bound(0.125, [1.0, 1.0], SegmentSpec([1.0, 1.0], [E, E]))
    assert abs(b.closed_form - 1.0) <= 1e-10
    assert abs(b.quadrature - 1.0) <= 1e-8


# -- 3 ------------------------------------------------------------------------


def _claim34_configs(family, seed, count=10):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 6))
        f = rng.uniform(0.01, 0.3)
        R = rng.uniform(0.2, 5.0, n)
        p1 = np.exp(rng.uniform(np.log(0.2), np.log(5.0), n))
        state = PoolState(p1, R, np.zeros(n), f)
        wstar = rng.dirichlet(np.ones(n))
        delta = np.zeros(n)
        if family == "canonical_quadratic":
            # at a fixed delta != 0, F grows without bound as any p_i -> 0, so the
            # premise sup F <= 1 only holds on the delta = 0 slice, where F = 0
            F = CanonicalQuadratic(random_stiffness(rng, n, scale=0.3))
        elif family == "clipped_log_ray":
            F = ClippedLogRay((p1 @ R) * rng.uniform(0.5, 2.0), cap=1.0)
        else:
            F = ConstantZero()
        yield F, state, wstar, delta


@crit(3, "mechanized contradiction: a verified violation of the gradient bound exists")
@pytest.mark.parametrize("family", ["canonical_quadratic", "clipped_log_ray", "constant_zero"])
def test_c03_witness(family):
    # any SearchBudgetExceeded propagates and fails the criterion
    for F, s, w, d in _claim34_configs(family, seed=303):
        assert F.value(s.prices, w, s.reserves, d, s.fee_rate) <= 1.0
        wit = find_claim34_witness(F, s, w, delta=d)
        assert wit.verified_margin < -1e-10
        # independent re-evaluation of the margin with the analytic gradient
        p = wit.point
        g = F.grad_p(p, w, s.reserves, d, s.fee_rate)
        margin = g - 8 * s.fee_rate * s.reserves / (p @ s.reserves)
        assert margin[wit.component] < -1e-10


# -- 4 ------------------------------------------------------------------------


@crit(4, "Euler identity p . grad F = 0 for degree-0 F; log-value control gives 1")
def test_c04_euler():
    rng = np.random.default_rng(404)
    for _ in range(100):
        F, s, w, d = quadratic_case(rng)
        g = F.grad_p(s.prices, w, s.reserves, d, s.fee_rate)
        res = euler_residual(F, s, w, d)
        assert abs(res) <= 1e-8 * (1 + np.linalg.norm(g) * np.linalg.norm(s.prices))
    control = DslExpression("ln(dot(p,R))")
    for _ in range(10):
        s = random_pool(rng, int(rng.integers(1, 6)))
        assert abs(euler_residual(control, s, np.ones(s.n) / s.n) - 1.0) <= 1e-10


# -- 5 ------------------------------------------------------------------------


def _degree0_families(rng):
    n = 3
    yield CanonicalQuadratic(random_stiffness(rng, n, scale=0.3)), rng.dirichlet(np.ones(n))
    yield ConstantZero(), rng.dirichlet(np.ones(n))
    yield DslExpression("(p[1]*R[1]/dot(p,R) - wstar[1])^2", C1Reading.WEAK), rng.dirichlet(np.ones(n))


@crit(5, "uniform delta shrinkage is falsified for every c with a verified witness")
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_c05_shrinkage(seed):
    rng = np.random.default_rng(500 + seed)
    for F, w in _degree0_families(rng):
        rep = falsify_uniform_shrinkage(F, w, C_GRID, seed=seed)
        assert rep.all_verified
        assert [wit.extra["c"] for wit in rep.witnesses] == C_GRID
        for wit in rep.witnesses:
            assert wit.margin < 0 and wit.verified_margin < 0
            assert wit.verification_residual <= 1e-6 * (1 + abs(wit.margin) + 1)


# -- 6 ------------------------------------------------------------------------


@crit(6, "inner-product identity p . grad V_new = p.R/(1+F) + f p.l for degree-0 F")
@pytest.mark.parametrize("family", ["canonical_quadratic", "constant_zero"])
def test_c06_inner_product(family):
    rng = np.random.default_rng(606)
    for _ in range(100):
        F, s, w, d = CASES[family](rng)
        vb = v_new(s, F, w, d)
        res = inner_product_identity(F, s, w, d)
        assert res <= 1e-9 * (1 + abs(vb.diluted_value + vb.fee_income))


# -- 7 ------------------------------------------------------------------------


@crit(7, "C1/C2/C3: quadratic passes all three; clipped log ray fails C1-strong and C3")
def test_c07_quadratic_certified():
    rng = np.random.default_rng(707)
    F, s, w, _ = quadratic_case(rng, n=3)
    c1 = check_c1(F, SamplerConfig(seed=1, n=3))
    assert c1.passed and c1.worst == 0.0
    c2 = check_c2_concavity(F, s, w, SamplerConfig(seed=2))
    assert c2.passed and c2.worst <= 1e-9
    c3 = check_c3_target(F, s, w)
    assert c3.passed and c3.worst <= 1e-6


@crit(7, "C1/C2/C3: quadratic passes all three; clipped log ray fails C1-strong and C3")
def test_c07_log_ray_rejected():
    F = ClippedLogRay(2.0)
    s = PoolState([1.0, 1.0], [3.0, 1.0], [0.0, 0.0], 0.1)
    c1 = check_c1(F, SamplerConfig(seed=1))
    assert not c1.passed and c1.reading == "strong"
    assert c1.detail.startswith("F(p, w*, R, 0) =") and c1.worst > 0
    c3 = check_c3_target(F, s, np.array([0.5, 0.5]))
    assert not c3.passed and "not unique" in c3.detail


# -- 8 ------------------------------------------------------------------------


@crit(8, "analytic and finite-difference gradients of V_new agree")
@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_c08_grad_v_new(family):
    rng = np.random.default_rng(808)
    for _ in range(100):
        F, s, w, d = FAMILIES[family](rng)
        g = grad_v_new(s, F, w, d)
        fd = grad_v_new_fd(s, F, w, d)
        assert np.max(np.abs(g - fd)) <= 1e-6 * (1 + np.max(np.abs(g)))


# -- 9 ------------------------------------------------------------------------


@crit(9, "solver matches the closed-form rebalance; ascent stays monotone")
def test_c09_solver():
    rng = np.random.default_rng(909)
    for _ in range(100):
        F, s, w, _ = quadratic_case(rng)
        ds = target_rebalance(s.prices, w, s.reserves)
        assert np.all(s.reserves + ds > 0)
        r = solve_arbitrage(F, s, w)
        assert r.monotone
        assert np.max(np.abs(r.delta_hat - ds)) <= 1e-6


# -- 10 -----------------------------------------------------------------------


@crit(10, "DSL round trip, autodiff vs finite differences, positioned diagnostics")
def test_c10_round_trip():
    for expr, _ in expression_corpus(seed=10):
        assert fexpr.parse(fexpr.pretty(expr)) == expr


@crit(10, "DSL round trip, autodiff vs finite differences, positioned diagnostics")
def test_c10_autodiff():
    checked = 0
    for expr, envs in expression_corpus(seed=10):
        for env in envs:
            for target in ("p", "delta"):
                m = dsl_fd_mismatch(expr, env, target)
                if m is not None:
                    checked += 1
                    assert m <= 1e-5, fexpr.pretty(expr)
    assert checked >= 500


@crit(10, "DSL round trip, autodiff vs finite differences, positioned diagnostics")
@pytest.mark.parametrize("src, cls, col", [
    ("dot(p,", fexpr.FexprSyntaxError, 7),
    ("1 + ln(1, 2)", fexpr.ArityError, 5),
    ("2 * ln(0 - p[1])", fexpr.DomainError, 5),
])
def test_c10_diagnostics(src, cls, col):
    env = fexpr.make_env([1, 1], [0.5, 0.5], [1, 1], [0, 0], 0.1)
    with pytest.raises(cls) as exc:
        fexpr.evaluate(fexpr.parse(src), env)
    assert (exc.value.pos.line, exc.value.pos.col) == (1, col)
    assert "line 1, column" in str(exc.value)


# -- 11 -----------------------------------------------------------------------


@crit(11, "identical scenario and seed give byte-identical reports")
@pytest.mark.parametrize("name", ["canonical_quadratic.yaml", "clipped_log_ray.yaml"])
def test_c11_determinism(tmp_path, name):
    outs = []
    for run in ("a", "b"):
        out = tmp_path / run
        main(["run", str(SCENARIOS / name), "--out", str(out), "--seed", "5"])
        outs.append(out)
    docs = [json.loads((o / "report.json").read_text()) for o in outs]
    stripped = [json.dumps(strip_timing(d), sort_keys=True) for d in docs]
    assert stripped[0] == stripped[1]
    assert RunReport.from_dict(docs[0]).digest() == RunReport.from_dict(docs[1]).digest()
    assert (outs[0] / "checks.csv").read_bytes() == (outs[1] / "checks.csv").read_bytes()
