"""Scenario files: strict loading and validation.

A scenario is a YAML (or JSON) mapping; docs/scenario.md lists every key.
Unknown keys are rejected, and every error names the offending key path.
"""

import hashlib
from dataclasses import dataclass, field

import numpy as np
import yaml

from .discount import C1Reading, CanonicalQuadratic, ClippedLogRay, ConstantZero, DslExpression
from .errors import InvalidInput
from .fexpr import FexprError
from .pool import PoolState

CHECKS = (
    "c1",
    "c2",
    "c3",
    "euler",
    "numeraire",
    "inner-product",
    "gradient",
    "line-integral",
    "bound",
    "claim34-witness",
    "uniform-shrinkage",
)

CHECK_PARAMS = {
    "c1": {"samples", "seed"},
    "c2": {"samples", "seed", "delta_scale"},
    "c3": {"seed", "starts", "max_iterations"},
    "euler": {"delta"},
    "numeraire": {"delta", "lambdas"},
    "inner-product": {"delta"},
    "gradient": {"delta", "step"},
    "line-integral": {"delta", "p1", "p2", "quadrature_points"},
    "bound": {"p1", "p2", "quadrature_points"},
    "claim34-witness": {"delta", "p1", "slack", "max_doublings", "seed"},
    "uniform-shrinkage": {"c_grid", "seed", "random_states"},
}

_VECTOR_PARAMS = {"delta", "p1", "p2"}
_LIST_PARAMS = {"lambdas", "c_grid"}
_INT_PARAMS = {"samples", "seed", "starts", "max_iterations", "max_doublings", "quadrature_points"}
_FLOAT_PARAMS = {"delta_scale", "step", "slack"}
_BOOL_PARAMS = {"random_states"}

TOLERANCE_KEYS = {"c1", "c2", "c3", "euler", "numeraire", "inner-product", "gradient",
                  "line-integral", "bound"}

_TOP_KEYS = {"name", "seed", "pool", "target_weights", "discount", "checks", "tolerances"}
_POOL_KEYS = {"prices", "reserves", "lent", "fee_rate"}
_DISCOUNT_KEYS = {
    "canonical_quadratic": {"kind", "stiffness", "c1_reading"},
    "clipped_log_ray": {"kind", "anchor_value", "cap", "c1_reading"},
    "constant_zero": {"kind", "c1_reading"},
    "dsl": {"kind", "expression", "c1_reading"},
}


class ScenarioError(InvalidInput):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class CheckSpec:
    name: str
    params: dict = field(default_factory=dict)


@dataclass
class Scenario:
    name: str
    pool: PoolState
    target_weights: np.ndarray
    discount: object
    checks: list
    seed: int = None
    tolerances: dict = field(default_factory=dict)
    digest: str = ""


def _reject_unknown(mapping, allowed, path):
    for key in mapping:
        if key not in allowed:
            where = f"{path}.{key}" if path else str(key)
            raise ScenarioError(where, "unknown key")


def _require(mapping, key, path):
    if key not in mapping:
        raise ScenarioError(f"{path}.{key}" if path else key, "missing required key")
    return mapping[key]


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    return float(value)


def _vector(value, path, n=None):
    if not isinstance(value, (list, tuple)):
        raise ScenarioError(path, f"expected a list of numbers, got {value!r}")
    out = np.array([_number(v, f"{path}[{i}]") for i, v in enumerate(value)])
    if n is not None and out.size != n:
        raise ScenarioError(path, f"expected length {n}, got {out.size}")
    return out


def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(path, f"expected an integer, got {value!r}")
    return value


def _mapping(value, path):
    if not isinstance(value, dict):
        raise ScenarioError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def discount_from_spec(spec, n, path="discount"):
    """Build a DiscountFunction from its serialized record."""
    spec = _mapping(spec, path)
    kind = spec.get("kind", "dsl" if "expression" in spec else None)
    if kind not in _DISCOUNT_KEYS:
        raise ScenarioError(f"{path}.kind", f"expected one of {sorted(_DISCOUNT_KEYS)}, got {kind!r}")
    _reject_unknown(spec, _DISCOUNT_KEYS[kind], path)
    reading = spec.get("c1_reading", "strong")
    try:
        reading = C1Reading(reading)
    except ValueError:
        raise ScenarioError(f"{path}.c1_reading", "expected 'strong' or 'weak'") from None
    try:
        if kind == "canonical_quadratic":
            rows = _require(spec, "stiffness", path)
            if not isinstance(rows, list):
                raise ScenarioError(f"{path}.stiffness", "expected a list of rows")
            B = np.array([_vector(r, f"{path}.stiffness[{i}]", n) for i, r in enumerate(rows)])
            if B.shape != (n, n):
                raise ScenarioError(f"{path}.stiffness", f"expected a {n}x{n} matrix")
            return CanonicalQuadratic(B, reading)
        if kind == "clipped_log_ray":
            v0 = _number(_require(spec, "anchor_value", path), f"{path}.anchor_value")
            cap = _number(spec.get("cap", 1.0), f"{path}.cap")
            return ClippedLogRay(v0, cap, reading)
        if kind == "constant_zero":
            return ConstantZero(reading)
        source = _require(spec, "expression", path)
        if not isinstance(source, str):
            raise ScenarioError(f"{path}.expression", "expected a string")
        return DslExpression(source, reading)
    except FexprError as exc:
        raise ScenarioError(f"{path}.expression", str(exc)) from None
    except ScenarioError:
        raise
    except InvalidInput as exc:
        raise ScenarioError(path, str(exc)) from None


def _check_params(name, params, n, where):
    out = {}
    for key, value in params.items():
        kpath = f"{where}.{key}"
        if key in _VECTOR_PARAMS:
            value = _vector(value, kpath, n)
            if key in ("p1", "p2") and np.any(value <= 0):
                raise ScenarioError(kpath, "prices must be strictly positive")
        elif key in _LIST_PARAMS:
            value = [float(v) for v in _vector(value, kpath)]
            if not value:
                raise ScenarioError(kpath, "expected a non-empty list")
            if key == "lambdas" and any(v <= 0 for v in value):
                raise ScenarioError(kpath, "price scalings must be positive")
            if key == "c_grid" and any(not 0.0 < v < 1.0 for v in value):
                raise ScenarioError(kpath, "shrinkage factors must lie in (0, 1)")
        elif key in _INT_PARAMS:
            value = _integer(value, kpath)
            if key != "seed" and value <= 0:
                raise ScenarioError(kpath, "must be positive")
        elif key in _FLOAT_PARAMS:
            value = _number(value, kpath)
            if value <= 0:
                raise ScenarioError(kpath, "must be positive")
        elif key in _BOOL_PARAMS:
            if not isinstance(value, bool):
                raise ScenarioError(kpath, "expected true or false")
        out[key] = value
    return out


def _checks(raw, n, path="checks"):
    if not isinstance(raw, list) or not raw:
        raise ScenarioError(path, "expected a non-empty list of checks")
    out = []
    for i, item in enumerate(raw):
        where = f"{path}[{i}]"
        if isinstance(item, str):
            name, params = item, {}
        else:
            item = dict(_mapping(item, where))
            name = item.pop("name", None)
            params = item
        if name not in CHECKS:
            raise ScenarioError(f"{where}.name", f"unknown check {name!r}; expected one of {list(CHECKS)}")
        _reject_unknown(params, CHECK_PARAMS[name], where)
        out.append(CheckSpec(name, _check_params(name, params, n, where)))
    return out


def scenario_from_dict(data, digest=""):
    data = _mapping(data, "<root>")
    _reject_unknown(data, _TOP_KEYS, "")
    name = _require(data, "name", "")
    if not isinstance(name, str):
        raise ScenarioError("name", "expected a string")

    pool = _mapping(_require(data, "pool", ""), "pool")
    _reject_unknown(pool, _POOL_KEYS, "pool")
    prices = _vector(_require(pool, "prices", "pool"), "pool.prices")
    n = prices.size
    if n < 1:
        raise ScenarioError("pool.prices", "need at least one asset")
    if np.any(prices <= 0):
        raise ScenarioError("pool.prices", "prices must be strictly positive")
    reserves = _vector(_require(pool, "reserves", "pool"), "pool.reserves", n)
    if np.any(reserves < 0):
        raise ScenarioError("pool.reserves", "reserves must be nonnegative")
    lent = _vector(pool.get("lent", [0.0] * n), "pool.lent", n)
    if np.any(lent < 0):
        raise ScenarioError("pool.lent", "lent amounts must be nonnegative")
    fee = _number(_require(pool, "fee_rate", "pool"), "pool.fee_rate")
    if not 0.0 < fee < 1.0:
        raise ScenarioError("pool.fee_rate", f"must lie in the open interval (0, 1), got {fee}")
    state = PoolState(prices, reserves, lent, fee)

    wstar = _vector(_require(data, "target_weights", ""), "target_weights", n)
    if np.any(wstar < 0) or np.any(wstar > 1) or abs(wstar.sum() - 1.0) > 1e-9:
        raise ScenarioError("target_weights", "must lie in the simplex (entries in [0, 1] summing to 1)")

    discount = discount_from_spec(_require(data, "discount", ""), n)
    checks = _checks(_require(data, "checks", ""), n)

    seed = data.get("seed")
    if seed is not None:
        seed = _integer(seed, "seed")
    tolerances = _mapping(data.get("tolerances", {}) or {}, "tolerances")
    _reject_unknown(tolerances, TOLERANCE_KEYS, "tolerances")
    tolerances = {k: _number(v, f"tolerances.{k}") for k, v in tolerances.items()}
    return Scenario(name, state, wstar, discount, checks, seed, tolerances, digest)


def load_scenario(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ScenarioError("<file>", f"not valid YAML/JSON: {exc}") from None
    return scenario_from_dict(data, hashlib.sha256(raw).hexdigest())
