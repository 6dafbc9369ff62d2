"""Command line interface.

Subcommands:
  run       run one scenario, print its metrics row, optionally trace
  sweep     run an axis sweep over seeds, write runs.csv / aggregate.csv
  replay    recompute the metrics row from a saved trace
  validate  parse a scenario and print the normalized settings

Exit codes: 0 success, 1 bad input (scenario or trace), 2 runtime
failure.  DART_SEED in the environment sets the default seed; explicit
`seed = ...` in a file or --set still wins.
"""

from __future__ import annotations

import argparse
import os
import sys

from .experiments import replay_trace, run_scenario, run_sweep
from .metrics import RUN_CSV_COLUMNS, TraceError, format_run_row
from .scenario import (Scenario, ScenarioError, apply_overrides, describe,
                       load_scenario, validate)


def _split_pair(flag, text):
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise ScenarioError(f"{flag} expects KEY=VALUE, got {text!r}")
    return key.strip(), value.strip()


def _parse_seeds(text):
    try:
        seeds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ScenarioError(f"--seeds expects comma-separated integers, "
                            f"got {text!r}") from None
    if not seeds:
        raise ScenarioError("--seeds expects at least one seed")
    return seeds


def _build_scenario(args):
    base = Scenario()
    env_seed = os.environ.get("DART_SEED")
    if env_seed is not None:
        try:
            base.seed = int(env_seed)
        except ValueError:
            raise ScenarioError(f"DART_SEED must be an integer, "
                                f"got {env_seed!r}") from None
    overrides = [_split_pair("--set", text) for text in args.set]
    if args.scenario is not None:
        return load_scenario(args.scenario, overrides, base=base)
    apply_overrides(base, overrides)
    validate(base)
    return base


def _cmd_run(args):
    scenario = _build_scenario(args)
    meta, _, metrics = run_scenario(scenario, trace_path=args.trace)
    print(",".join(RUN_CSV_COLUMNS))
    print(",".join(format_run_row(meta, metrics)))
    return 0


def _cmd_sweep(args):
    scenario = _build_scenario(args)
    axes = [_split_pair("--axis", text) for text in args.axis]
    axes = [(key, [v.strip() for v in raw.split(",") if v.strip()])
            for key, raw in axes]
    for key, values in axes:
        if not values:
            raise ScenarioError(f"--axis {key} has no values")
    seeds = _parse_seeds(args.seeds)
    runs_path, agg_path, failures = run_sweep(scenario, axes, seeds,
                                              args.out, jobs=args.jobs)
    print(f"wrote {runs_path}")
    print(f"wrote {agg_path}")
    if failures:
        for point, exc in failures:
            print(f"failed: seed={point.seed}: {exc}", file=sys.stderr)
        return 2
    return 0


def _cmd_replay(args):
    _, _, _, row = replay_trace(args.trace)
    print(",".join(RUN_CSV_COLUMNS))
    print(",".join(row))
    return 0


def _cmd_validate(args):
    scenario = _build_scenario(args)
    print(describe(scenario))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dartsim",
        description="Delay-aware routing simulator for sensor networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_scenario_flags(p):
        p.add_argument("--scenario", metavar="FILE",
                       help="scenario file (key = value lines)")
        p.add_argument("--set", metavar="KEY=VALUE", action="append",
                       default=[], help="override one setting (repeatable)")

    p_run = sub.add_parser("run", help="run one scenario")
    add_scenario_flags(p_run)
    p_run.add_argument("--trace", metavar="FILE",
                       help="write the full event trace here")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run an axis sweep over seeds")
    add_scenario_flags(p_sweep)
    p_sweep.add_argument("--axis", metavar="KEY=V1,V2,...", action="append",
                         default=[], help="sweep axis (repeatable)")
    p_sweep.add_argument("--seeds", default="0", metavar="S1,S2,...",
                         help="comma-separated seed list")
    p_sweep.add_argument("--out", required=True, metavar="DIR",
                         help="output directory for runs.csv / aggregate.csv")
    p_sweep.add_argument("--jobs", type=int, default=1, metavar="N",
                         help="parallel worker processes")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_replay = sub.add_parser("replay", help="recompute metrics from a trace")
    p_replay.add_argument("trace", metavar="TRACE")
    p_replay.set_defaults(func=_cmd_replay)

    p_val = sub.add_parser("validate", help="check and print a scenario")
    add_scenario_flags(p_val)
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:                      # runtime failure
        print(f"error: {exc!r}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
