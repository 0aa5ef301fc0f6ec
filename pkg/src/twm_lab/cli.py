"""``twm-lab`` command line: run scenarios, sweep one parameter, validate expressions."""

import argparse
import os
import sys
from pathlib import Path

from . import fexpr
from .report import gap_rows, shrinkage_rows, summary_rows, write_csv
from .runner import SWEEP_PARAMETERS, apply_sweep, exit_status, run_scenario
from .scenario import ScenarioError, load_scenario

EXIT_CONFIG = 2


def resolve_seed(cli_seed, scenario_seed):
    """--seed, then the scenario's seed, then $TWM_LAB_SEED, then 0."""
    if cli_seed is not None:
        return cli_seed
    if scenario_seed is not None:
        return scenario_seed
    env = os.environ.get("TWM_LAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ScenarioError("TWM_LAB_SEED", f"expected an integer, got {env!r}") from None
    return 0


def _write_run(report, out):
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    write_csv(out / "checks.csv", summary_rows(report))
    gaps = gap_rows(report)
    if gaps:
        write_csv(out / "claim34_gap.csv", gaps)
    shrink = shrinkage_rows(report)
    if shrink:
        write_csv(out / "shrinkage_witnesses.csv", shrink)


def _print_summary(report, stream=sys.stdout):
    for check in report.checks:
        print(f"{check.status.upper():6s} {check.name:18s} [{check.polarity}] {check.message}",
              file=stream)


def cmd_run(args):
    scenario = load_scenario(args.scenario)
    seed = resolve_seed(args.seed, scenario.seed)
    report = run_scenario(scenario, seed, jobs=args.jobs)
    _write_run(report, Path(args.out))
    _print_summary(report)
    return report.exit_status


def _parse_grid(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ScenarioError("--grid", f"expected comma-separated numbers, got {text!r}") from None
    if not values:
        raise ScenarioError("--grid", "empty grid")
    return values


def cmd_sweep(args):
    scenario = load_scenario(args.scenario)
    seed = resolve_seed(args.seed, scenario.seed)
    grid = _parse_grid(args.grid)
    variants = [apply_sweep(scenario, args.param, v) for v in grid]
    rows, statuses = [], []
    for value, variant in zip(grid, variants):
        report = run_scenario(variant, seed, jobs=args.jobs, parameters={args.param: value})
        statuses.extend(report.checks)
        for row in summary_rows(report):
            rows.append((args.param, value) + row)
        print(f"{args.param}={value!r}: exit {report.exit_status}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", rows, extra_columns=("parameter", "parameter_value"))
    return exit_status(statuses)


def cmd_parse_check(args):
    try:
        expr = fexpr.parse(args.expression)
    except fexpr.FexprError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(fexpr.pretty(expr))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="twm-lab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the checks listed in a scenario")
    run.add_argument("scenario")
    run.add_argument("--out", default="twm-lab-out")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--seed", type=int)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="rerun a scenario over a parameter grid")
    sweep.add_argument("scenario")
    sweep.add_argument("--param", required=True, choices=SWEEP_PARAMETERS)
    sweep.add_argument("--grid", required=True, help="comma-separated values")
    sweep.add_argument("--out", default="twm-lab-out")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--seed", type=int)
    sweep.set_defaults(func=cmd_sweep)

    pc = sub.add_parser("parse-check", help="validate a discount expression")
    pc.add_argument("expression")
    pc.set_defaults(func=cmd_parse_check)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
