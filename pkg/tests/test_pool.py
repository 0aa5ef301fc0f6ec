import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import CASES
from twm_lab.discount import CanonicalQuadratic, ConstantZero, DslExpression
from twm_lab.errors import AllReservesZero, DegenerateDiscount, InvalidPoolState, StepTooLarge
from twm_lab.pool import PoolState, grad_v_new, grad_v_new_fd, mark_weights, v_new, v_old


def pool(p, R, lent=None, f=0.1):
    return PoolState(p, R, np.zeros(len(p)) if lent is None else lent, f)


@pytest.mark.parametrize(
    "p, R, expected",
    [((1, 1), (1, 1), (0.5, 0.5)), ((2, 1), (1, 2), (0.5, 0.5)), ((1, 1), (3, 1), (0.75, 0.25))],
)
def test_mark_weights_examples(p, R, expected):
    np.testing.assert_allclose(mark_weights(pool(p, R)), expected, rtol=0, atol=1e-15)


def test_mark_weights_all_zero():
    with pytest.raises(AllReservesZero):
        mark_weights(pool((1, 1), (0, 0)))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(
    st.lists(st.floats(1e-3, 1e3), min_size=n, max_size=n),
    st.lists(st.one_of(st.just(0.0), st.floats(1e-6, 1e3)), min_size=n, max_size=n))))
def test_weights_normalized(pr):
    p, R = pr
    if sum(R) == 0:
        R[0] = 1.0
    w = mark_weights(pool(p, R))
    assert abs(w.sum() - 1.0) <= 1e-12
    assert np.all((w >= 0) & (w <= 1))


@pytest.mark.parametrize("p, R, expected", [((1, 1), (1, 1), 2.0), ((2, 3), (1, 1), 5.0), ((1, 1), (0, 0), 0.0)])
def test_v_old(p, R, expected):
    assert v_old(pool(p, R)) == expected


@pytest.mark.parametrize(
    "kwargs",
    [dict(prices=[0, 1]), dict(reserves=[-1, 1]), dict(lent=[0, -1]), dict(fee_rate=1.0),
     dict(fee_rate=0.0), dict(reserves=[1, 1, 1]), dict(prices=[])],
)
def test_pool_state_rejects(kwargs):
    base = dict(prices=[1, 1], reserves=[1, 1], lent=[0, 0], fee_rate=0.1)
    base.update(kwargs)
    if kwargs.get("prices") == []:
        base.update(reserves=[], lent=[])
    with pytest.raises(InvalidPoolState):
        PoolState(**base)


def test_v_new_examples():
    s = pool((1, 1), (1, 1), lent=(1, 0), f=0.1)
    vb = v_new(s, ConstantZero(), [0.5, 0.5])
    assert vb.v_new == pytest.approx(2.1, abs=1e-12)
    assert vb.total_value == 2.0 and vb.fee_income == pytest.approx(0.1)
    # F = 1 at the point: 2 / (1 + 1)
    one = DslExpression("1")
    assert v_new(pool((1, 1), (1, 1)), one, [0.5, 0.5]).v_new == 1.0


def test_v_new_degenerate():
    with pytest.raises(DegenerateDiscount):
        v_new(pool((1, 1), (1, 1)), DslExpression("0-1"), [0.5, 0.5])
    with pytest.raises(DegenerateDiscount):
        grad_v_new(pool((1, 1), (1, 1)), DslExpression("0-2"), [0.5, 0.5])


def test_f_zero_reduction():
    rng = np.random.default_rng(3)
    for _ in range(50):
        F, s, w, _ = CASES["canonical_quadratic"](rng)
        vb = v_new(s, F, w)  # delta = 0 gives F = 0 exactly
        assert vb.discount == 0.0
        assert vb.v_new == pytest.approx(v_old(s) + vb.fee_income, rel=1e-12)


def test_grad_constant_zero_is_R_plus_f_lent():
    s = pool((1.5, 0.7), (2, 3), lent=(1, 4), f=0.2)
    np.testing.assert_allclose(grad_v_new(s, ConstantZero(), [0.5, 0.5]), [2.2, 3.8], atol=1e-15)


def test_fd_linear_exact():
    s = pool((1, 1), (2, 3))
    g1 = grad_v_new_fd(s, ConstantZero(), [0.5, 0.5], step=1e-6)
    g2 = grad_v_new_fd(s, ConstantZero(), [0.5, 0.5], step=1e-3)
    np.testing.assert_allclose(g1, [2, 3], atol=1e-8)
    np.testing.assert_allclose(g1, g2, atol=1e-10)


def test_fd_step_too_large():
    with pytest.raises(StepTooLarge):
        grad_v_new_fd(pool((1, 1), (2, 3)), ConstantZero(), [0.5, 0.5], step=1.0)


@pytest.mark.parametrize("family", sorted(CASES))
def test_gradient_consistency(family):
    rng = np.random.default_rng(17)
    for _ in range(100):
        F, s, w, d = CASES[family](rng)
        g = grad_v_new(s, F, w, d)
        fd = grad_v_new_fd(s, F, w, d)
        assert np.max(np.abs(g - fd)) <= 1e-6 * (1 + np.max(np.abs(g)))


def test_inner_product_for_degree0():
    # p . grad V_new = p.R/(1+F) + f p.l for F homogeneous of degree 0
    rng = np.random.default_rng(5)
    for _ in range(30):
        F, s, w, d = CASES["canonical_quadratic"](rng)
        vb = v_new(s, F, w, d)
        assert s.prices @ grad_v_new(s, F, w, d) == pytest.approx(vb.diluted_value + vb.fee_income, rel=1e-11)


@pytest.mark.parametrize("lam", [0.5, 2.0, 10.0])
def test_numeraire_law(lam):
    rng = np.random.default_rng(9)
    for _ in range(30):
        F, s, w, d = CASES["canonical_quadratic"](rng)
        scaled = v_new(s.with_prices(lam * s.prices), F, w, d).v_new
        assert scaled == pytest.approx(lam * v_new(s, F, w, d).v_new, rel=1e-10)


def test_quadratic_grad_matches_dense_oracle():
    # oracle: differentiate the literal half-quadratic form by finite differences
    rng = np.random.default_rng(0)
    F, s, w, d = CASES["canonical_quadratic"](rng, n=3)
    B = F.stiffness

    def literal(p):
        ds = (p @ s.reserves) * w / p - s.reserves
        return 0.5 * ds @ B @ ds - 0.5 * (d - ds) @ B @ (d - ds)

    from twm_lab.numdiff import central_gradient

    np.testing.assert_allclose(F.grad_p(s.prices, w, s.reserves, d, s.fee_rate),
                               central_gradient(literal, s.prices, positive=True), rtol=1e-6, atol=1e-8)
    assert F.value(s.prices, w, s.reserves, d, s.fee_rate) == pytest.approx(literal(s.prices), rel=1e-12)
    assert isinstance(F, CanonicalQuadratic)
