"""Command-line entry point.

Subcommands: `validate` (parse a config only), `run` (execute its tasks),
`sweep` (expand parameters.time_grid into a time list, then run). Reports go
to files under --out (overridden by the POINTER_LAB_OUT environment
variable); diagnostics go to stderr. Exit status is 0 iff every task
succeeded, 1 when any task failed, and 2 on configuration errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .config import ScenarioConfig, ScenarioError, parse_scenario
from .runner import emit_report, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointerlab",
        description="Scenario-driven analysis of channel-preserved observables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to a scenario config (JSON)")

    sub.add_parser("validate", parents=[common], help="parse and validate a config, run nothing")

    for name, text in (("run", "execute every requested task"),
                       ("sweep", "expand parameters.time_grid into times, then run")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--out", default=".", help="output directory (env POINTER_LAB_OUT overrides)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--format", choices=("json", "csv", "both"), default="both",
                       help="json report only, or also CSV time series (json is always written)")
    return parser


def _expand_sweep(config: ScenarioConfig) -> ScenarioConfig:
    if config.kind != "canonical_decoherence":
        raise ScenarioError("sweep applies to canonical_decoherence configs only")
    grid = config.parameters.get("time_grid")
    if grid is None:
        raise ScenarioError("config.parameters.time_grid: required by the sweep command")
    times = [float(t) for t in np.linspace(grid["start"], grid["stop"], grid["count"])]
    parameters = dict(config.parameters)
    parameters["times"] = times
    return dataclasses.replace(config, parameters=parameters)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = parse_scenario(args.config)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: {config.name} ({config.kind}, {len(config.outputs)} task(s))", file=sys.stderr)
        return 0

    try:
        if args.command == "sweep":
            config = _expand_sweep(config)
        if args.seed is not None:
            config = dataclasses.replace(config, seed=int(args.seed))
        out_dir = os.environ.get("POINTER_LAB_OUT") or args.out
        report = run_scenario(config)
        written = emit_report(report, out_dir, formats=args.format)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    for path in written:
        print(f"wrote {path}", file=sys.stderr)
    for task in report.tasks:
        if task.status != "ok":
            print(f"task {task.name} failed: {task.message}", file=sys.stderr)
    return 0 if report.succeeded else 1


if __name__ == "__main__":
    sys.exit(main())
