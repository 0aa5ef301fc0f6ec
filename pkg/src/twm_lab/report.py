"""Run reports: JSON documents plus fixed-column CSV tables."""

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

CSV_COLUMNS = ("scenario", "check", "quantity", "value", "tolerance", "verdict")
TIMING_KEYS = ("wall_time_s",)


def jsonable(obj):
    """Convert numpy values and containers into plain JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


@dataclass
class CheckReport:
    name: str
    polarity: str  # "holds": the property must hold; "witness": a violation must be found
    status: str  # pass | fail | error | budget
    quantities: dict = field(default_factory=dict)
    tolerance: float = None
    seed: int = None
    witnesses: list = field(default_factory=list)
    message: str = ""
    details: dict = field(default_factory=dict)
    wall_time_s: float = 0.0

    @property
    def passed(self):
        return self.status == "pass"

    def to_dict(self):
        return jsonable(asdict(self))

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass
class RunReport:
    scenario: str
    artifact_version: str
    input_digest: str
    seed: int
    checks: list = field(default_factory=list)
    exit_status: int = 0
    parameters: dict = field(default_factory=dict)

    def to_dict(self):
        out = {k: jsonable(v) for k, v in asdict(self).items() if k != "checks"}
        out["checks"] = [c.to_dict() for c in self.checks]
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        checks = [CheckReport.from_dict(c) for c in data.pop("checks")]
        return cls(checks=checks, **data)

    def to_json(self, timing=True):
        data = self.to_dict()
        if not timing:
            data = strip_timing(data)
        return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"

    def digest(self):
        """SHA-256 of the report with timing fields removed."""
        return hashlib.sha256(self.to_json(timing=False).encode()).hexdigest()


def strip_timing(data):
    if isinstance(data, dict):
        return {k: strip_timing(v) for k, v in data.items() if k not in TIMING_KEYS}
    if isinstance(data, list):
        return [strip_timing(v) for v in data]
    return data


def summary_rows(report):
    rows = []
    for check in report.checks:
        verdict = check.status
        if not check.quantities:
            rows.append((report.scenario, check.name, "status", "", check.tolerance, verdict))
        for quantity, value in sorted(check.quantities.items()):
            rows.append((report.scenario, check.name, quantity, value, check.tolerance, verdict))
    return rows


def gap_rows(report):
    rows = []
    for check in report.checks:
        if check.name != "claim34-witness":
            continue
        for point in check.details.get("gap_curve", []):
            rows.append((report.scenario, check.name, f"gap@norm_p2={point['norm_p2']!r}",
                         point["gap"], None, check.status))
    return rows


def shrinkage_rows(report):
    rows = []
    for check in report.checks:
        if check.name != "uniform-shrinkage":
            continue
        for w in check.witnesses:
            verdict = "witness" if w.get("verified") else "unverified"
            rows.append((report.scenario, check.name, f"margin@c={w['c']!r}",
                         w["margin"], check.tolerance, verdict))
            rows.append((report.scenario, check.name, f"fd_residual@c={w['c']!r}",
                         w["verification_residual"], check.tolerance, verdict))
    return rows


def write_csv(path, rows, extra_columns=()):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(tuple(extra_columns) + CSV_COLUMNS)
        for row in rows:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                             for v in row])
