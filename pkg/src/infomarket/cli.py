"""Command-line interface: one subcommand per experiment plus config tools.

Exit codes: 0 success, 2 configuration error, 3 convergence failure.
Every simulation parameter is reachable as ``--<section.key> <value>``;
precedence is CLI > --config file > defaults.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import SimParams, parse_config_file
from .errors import ConfigError, NoConvergence
from .harness import (
    EXPERIMENTS,
    ExperimentConfig,
    RunRecord,
    load_overrides,
    run_experiment,
    summary_stats,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3

DEFAULT_TICKS = {
    "baseline": 150,
    "shocks": 150,
    "weight_sensitivity": 100,
    "noise_robustness": 150,
    "event_detection": 150,
    "cross_platform": 120,
    "sweep": 120,
    "policy_comparison": 150,
    "robust_select": 100,
}


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=42, help="master random seed")
    parser.add_argument("--config", type=Path, default=None, help="flat key=value config file")
    parser.add_argument("--out", type=Path, default=None, help="output directory")
    parser.add_argument("--ticks", type=int, default=None, help="simulation horizon")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers for cell grids")
    for key in sorted(SimParams().flatten()):
        parser.add_argument(f"--{key}", dest=key, default=None, metavar="V", help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="infomarket",
        description="deterministic information-market simulator and experiment harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for experiment in EXPERIMENTS:
        name = experiment.replace("_", "-")
        aliases = [experiment] if name != experiment else []
        p = sub.add_parser(name, aliases=aliases, help=f"run the {experiment} experiment")
        _add_common(p)
        p.set_defaults(experiment=experiment)
    v = sub.add_parser("validate-config", help="check a config file and exit")
    v.add_argument("--config", type=Path, required=True)
    r = sub.add_parser("report", help="recompute the summary for a finished run directory")
    r.add_argument("directory", type=Path)
    return parser


def _cmd_validate(args: argparse.Namespace) -> int:
    overrides = parse_config_file(args.config)
    load_overrides(None, overrides)
    print(f"{args.config}: OK ({len(overrides)} keys)")
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    run_csv = args.directory / "results" / "run.csv"
    if not run_csv.exists():
        print(f"no run record at {run_csv}", file=sys.stderr)
        return EXIT_CONFIG
    record = RunRecord.from_csv(run_csv)
    stats = summary_stats(record)
    print(json.dumps(stats.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_experiment(args: argparse.Namespace) -> int:
    cli_pairs = {
        key: getattr(args, key)
        for key in SimParams().flatten()
        if getattr(args, key, None) is not None
    }
    overrides = load_overrides(args.config, cli_pairs)
    run_overrides = {k: v for k, v in overrides.items() if k.startswith("run.")}
    sim_overrides = {k: v for k, v in overrides.items() if not k.startswith("run.")}
    seed = int(run_overrides.get("run.master_seed", args.seed))
    ticks = args.ticks
    if ticks is None:
        ticks = int(run_overrides.get("run.max_ticks", DEFAULT_TICKS[args.experiment]))
    out = args.out if args.out is not None else Path("out") / args.experiment
    cfg = ExperimentConfig(
        experiment=args.experiment,
        master_seed=seed,
        max_ticks=ticks,
        jobs=int(run_overrides.get("run.jobs", args.jobs)),
        out_dir=out,
        overrides=sim_overrides,
    )
    run_experiment(cfg)
    summary = Path(out) / "summary.txt"
    if summary.exists():
        print(summary.read_text(encoding="utf-8"), end="")
    print(f"results written to {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate-config":
            return _cmd_validate(args)
        if args.command == "report":
            return _cmd_report(args)
        return _cmd_experiment(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoConvergence as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
