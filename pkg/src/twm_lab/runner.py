"""Dispatch scenario checks and assemble run reports."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__
from .discount import SamplerConfig, check_c1, check_c2_concavity, check_c3_target
from .errors import PremiseFailure, SearchBudgetExceeded, TWMError
from .pool import grad_v_new, grad_v_new_fd, v_new
from .report import CheckReport, RunReport, jsonable
from .solver import SolverConfig
from .theorems import (
    SegmentSpec,
    WitnessConfig,
    check_numeraire,
    euler_residual,
    euler_scale,
    falsify_uniform_shrinkage,
    find_claim34_witness,
    inner_product_identity,
    line_integral_bound,
    line_integral_grad,
)

DEFAULT_TOLERANCES = {
    "c1": 1e-10,
    "c2": 1e-9,
    "c3": 1e-6,
    "euler": 1e-8,
    "numeraire": 1e-10,
    "inner-product": 1e-9,
    "gradient": 1e-6,
    "line-integral": 1e-6,
    "bound": 1e-8,
    "claim34-witness": 1e-10,
    "uniform-shrinkage": 1e-6,
}

POLARITY = {name: "holds" for name in DEFAULT_TOLERANCES}
POLARITY["claim34-witness"] = "witness"
POLARITY["uniform-shrinkage"] = "witness"

DEFAULT_C_GRID = (0.01, 0.1, 0.5, 0.9, 0.99)


def _delta(params, n):
    return np.asarray(params.get("delta", np.zeros(n)), dtype=float)


def _c1(sc, params, seed, tol):
    cfg = SamplerConfig(samples=params.get("samples", 1000), seed=seed, n=sc.pool.n)
    rep = check_c1(sc.discount, cfg)
    return rep.worst <= tol, {"max_abs_F_at_zero": rep.worst}, [], rep.detail, {"reading": rep.reading}


def _c2(sc, params, seed, tol):
    cfg = SamplerConfig(samples=params.get("samples", 1000), seed=seed,
                        delta_scale=params.get("delta_scale", 1.0))
    rep = check_c2_concavity(sc.discount, sc.pool, sc.target_weights, cfg)
    return rep.worst <= tol, {"worst_midpoint_shortfall": rep.worst}, [], rep.detail, {}


def _c3(sc, params, seed, tol):
    cfg = SolverConfig(seed=seed, starts=params.get("starts", 5),
                       max_iterations=params.get("max_iterations", 10000))
    rep = check_c3_target(sc.discount, sc.pool, sc.target_weights, cfg)
    ok = rep.extra["converged"] and rep.extra["unique"] and rep.worst <= tol
    return ok, {"weight_error": rep.worst}, [], rep.detail, rep.extra


def _euler(sc, params, seed, tol):
    delta = _delta(params, sc.pool.n)
    res = euler_residual(sc.discount, sc.pool, sc.target_weights, delta)
    scale = euler_scale(sc.discount, sc.pool, sc.target_weights, delta)
    ok = abs(res) <= tol * scale
    return ok, {"euler_residual": res, "scale": scale}, [], "p . grad_p F", {}


def _numeraire(sc, params, seed, tol):
    rep = check_numeraire(sc.discount, sc.pool, sc.target_weights, _delta(params, sc.pool.n),
                          params.get("lambdas", (0.5, 2.0, 10.0)))
    q = {f"rel_error@lambda={lam!r}": e for lam, e in zip(rep.lambdas, rep.relative_errors)}
    q["max_rel_error"] = rep.max_relative_error
    return rep.max_relative_error <= tol, q, [], "V_new(lambda p) vs lambda V_new(p)", {}


def _inner(sc, params, seed, tol):
    delta = _delta(params, sc.pool.n)
    res = inner_product_identity(sc.discount, sc.pool, sc.target_weights, delta)
    vb = v_new(sc.pool, sc.discount, sc.target_weights, delta)
    scale = 1.0 + abs(vb.diluted_value + vb.fee_income)
    return res <= tol * scale, {"residual": res, "scale": scale}, [], "", {}


def _gradient(sc, params, seed, tol):
    delta = _delta(params, sc.pool.n)
    g = grad_v_new(sc.pool, sc.discount, sc.target_weights, delta)
    fd = grad_v_new_fd(sc.pool, sc.discount, sc.target_weights, delta, params.get("step", 1e-6))
    err = float(np.max(np.abs(g - fd)))
    scale = 1.0 + float(np.max(np.abs(g)))
    return err <= tol * scale, {"max_abs_mismatch": err, "scale": scale}, [], "", {
        "analytic": g, "finite_difference": fd}


def _segment(sc, params):
    p1 = np.asarray(params.get("p1", sc.pool.prices), dtype=float)
    p2 = np.asarray(params.get("p2", 2.0 * p1), dtype=float)
    return SegmentSpec(p1, p2, params.get("quadrature_points", 2048))


def _line_integral(sc, params, seed, tol):
    seg = _segment(sc, params)
    delta = _delta(params, sc.pool.n)
    F, w, R, f = sc.discount, sc.target_weights, sc.pool.reserves, sc.pool.fee_rate
    integral = line_integral_grad(F, seg, w, R, delta, f)
    exact = F.value(seg.p2, w, R, delta, f) - F.value(seg.p1, w, R, delta, f)
    err = abs(integral - exact)
    return err <= tol * (1.0 + abs(exact)), {
        "line_integral": integral, "F_difference": exact, "abs_error": err}, [], "", {}


def _bound(sc, params, seed, tol):
    seg = _segment(sc, params)
    b = line_integral_bound(sc.pool.fee_rate, sc.pool.reserves, seg)
    return b.discrepancy <= tol, {"closed_form": b.closed_form, "quadrature": b.quadrature,
                                   "abs_error": b.discrepancy}, [], "8 f ln(p2.R / p1.R)", {}


def _claim34(sc, params, seed, tol):
    cfg = WitnessConfig(slack=params.get("slack", 1e-3),
                        max_doublings=params.get("max_doublings", 60), seed=seed,
                        verify_tol=tol)
    w = find_claim34_witness(sc.discount, sc.pool, sc.target_weights, params.get("p1"), cfg,
                             _delta(params, sc.pool.n))
    gap_curve = w.extra.pop("gap_curve")
    ok = w.verified_margin < -tol
    q = {"margin": w.margin, "verified_margin": w.verified_margin,
         "verification_residual": w.verification_residual}
    return ok, q, [w.to_dict()], "violation of the gradient bound found", {"gap_curve": gap_curve}


def _shrinkage(sc, params, seed, tol):
    c_grid = params.get("c_grid", DEFAULT_C_GRID)
    state = None if params.get("random_states", False) else sc.pool
    rep = falsify_uniform_shrinkage(sc.discount, sc.target_weights, c_grid, seed=seed,
                                    state=state, fd_tol=tol)
    q = {"max_euler_residual": max(abs(e) for e in rep.euler_residuals),
         "max_inner_product_residual": max(rep.inner_product_checks),
         "witnesses_found": float(len(rep.witnesses))}
    witnesses = [w.to_dict() for w in rep.witnesses]
    msg = f"witness for every c (reading: {rep.reading})" if rep.all_verified else "unverified witness"
    return rep.all_verified, q, witnesses, msg, {"aggregates": rep.aggregates}


_DISPATCH = {
    "c1": _c1,
    "c2": _c2,
    "c3": _c3,
    "euler": _euler,
    "numeraire": _numeraire,
    "inner-product": _inner,
    "gradient": _gradient,
    "line-integral": _line_integral,
    "bound": _bound,
    "claim34-witness": _claim34,
    "uniform-shrinkage": _shrinkage,
}


def run_check(scenario, spec, seed):
    tol = scenario.tolerances.get(spec.name, DEFAULT_TOLERANCES[spec.name])
    check_seed = spec.params.get("seed", seed)
    start = time.perf_counter()
    report = CheckReport(spec.name, POLARITY[spec.name], "error", tolerance=tol, seed=check_seed)
    try:
        ok, quantities, witnesses, message, details = _DISPATCH[spec.name](
            scenario, spec.params, check_seed, tol)
        report.status = "pass" if ok else "fail"
        report.quantities = jsonable(quantities)
        report.witnesses = jsonable(witnesses)
        report.message = message
        report.details = jsonable(details)
    except SearchBudgetExceeded as exc:
        report.status = "budget"
        report.message = str(exc)
    except PremiseFailure as exc:
        report.status = "fail"
        report.message = f"premise F <= 1 violated: {exc}"
    except TWMError as exc:
        report.message = f"{type(exc).__name__}: {exc}"
    report.wall_time_s = time.perf_counter() - start
    return report


def exit_status(checks):
    statuses = {c.status for c in checks}
    if "budget" in statuses:
        return 3
    if statuses - {"pass"}:
        return 1
    return 0


def run_scenario(scenario, seed, jobs=1, parameters=None):
    specs = list(scenario.checks)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            checks = list(pool.map(lambda s: run_check(scenario, s, seed), specs))
    else:
        checks = [run_check(scenario, s, seed) for s in specs]
    # stable order: scenario order, which map() preserves
    report = RunReport(
        scenario=scenario.name,
        artifact_version=__version__,
        input_digest=scenario.digest,
        seed=seed,
        checks=checks,
        parameters=dict(parameters or {}),
    )
    report.exit_status = exit_status(checks)
    return report


SWEEP_PARAMETERS = ("fee_rate", "price_scale", "stiffness_scale", "c")


def apply_sweep(scenario, parameter, value):
    """A copy of ``scenario`` with one whitelisted parameter set to ``value``."""
    from .scenario import CheckSpec, ScenarioError

    if parameter == "fee_rate":
        if not 0.0 < value < 1.0:
            raise ScenarioError("--grid", f"fee_rate must lie in (0, 1), got {value}")
        return replace(scenario, pool=replace(scenario.pool, fee_rate=value))
    if parameter == "price_scale":
        if value <= 0:
            raise ScenarioError("--grid", "price_scale must be positive")
        return replace(scenario, pool=scenario.pool.with_prices(scenario.pool.prices * value))
    if parameter == "stiffness_scale":
        if value <= 0:
            raise ScenarioError("--grid", "stiffness_scale must be positive")
        try:
            return replace(scenario, discount=scenario.discount.scaled(value))
        except TWMError as exc:
            raise ScenarioError("discount", str(exc)) from None
    if parameter == "c":
        if not 0.0 < value < 1.0:
            raise ScenarioError("--grid", f"c must lie in (0, 1), got {value}")
        checks = [CheckSpec(s.name, {**s.params, "c_grid": [value]})
                  if s.name == "uniform-shrinkage" else s for s in scenario.checks]
        return replace(scenario, checks=checks)
    raise ScenarioError("--param", f"expected one of {list(SWEEP_PARAMETERS)}, got {parameter!r}")
