"""Command line entry point: ``lendsim <subcommand> ...``.

Exit codes: 0 success, 1 configuration error, 2 simulation error,
3 determinism violation.  Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import yaml

from . import __version__
from .engine import replay_check, run, sweep
from .errors import ConfigError, DeterminismViolation, LendSimError, SimulationError
from .feasibility import AVAILABLE_THRESHOLD, DEPOSIT_THRESHOLD, format_table, rank, read_snapshots, to_json
from .fixed import dec
from .scenario import load_scenario, parse_override

OUT_ENV = "LENDSIM_OUT"
DEFAULT_OUT = "lendsim-out"


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def _snapshot_path(source: str):
    if Path(source).exists():
        return Path(source)
    bundled = resources.files("lendsim").joinpath("scenarios", f"{source}.csv")
    if bundled.is_file():
        return bundled
    raise ConfigError("", f"no snapshot file or bundled snapshot named {source!r}")


def cmd_validate(args) -> int:
    sc = load_scenario(args.scenario, args.override)
    print(f"ok {sc.name} {sc.short_hash} ({len(sc.assets)} assets, {len(sc.agents)} agents, {sc.horizon_ticks} ticks)")
    return 0


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario, args.override)
    log = run(sc)
    csv_path, json_path = log.write(_out_dir(args))
    s = log.summary
    print(f"{sc.name} {sc.short_hash}: peak bad debt {s['peak_bad_debt']}, final {s['final_bad_debt']}, {s['liquidations']} liquidations")
    print(csv_path)
    print(json_path)
    return 0


def cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario, args.override)
    values = [yaml.safe_load(v) for v in args.values.split(",")]
    out = _out_dir(args)
    results = sweep(sc, args.param, values, workers=args.workers, out_dir=out)
    rows = []
    for value, summary in results:
        rows.append(
            {
                "value": value,
                "scenario_hash": summary["scenario_hash"],
                "peak_bad_debt": summary["peak_bad_debt"],
                "final_bad_debt": summary["final_bad_debt"],
                "liquidations": summary["liquidations"],
            }
        )
        print(f"{args.param}={value}: peak bad debt {summary['peak_bad_debt']}, final {summary['final_bad_debt']}")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{sc.name}-{sc.short_hash}.sweep.json"
    path.write_text(json.dumps({"param": args.param, "runs": rows}, indent=2) + "\n")
    print(path)
    return 0


def cmd_analyze(args) -> int:
    snaps = read_snapshots(_snapshot_path(args.snapshot))
    ranked = rank(snaps, args.available_threshold, args.deposit_threshold)
    text = to_json(ranked, args.available_threshold, args.deposit_threshold) if args.json else format_table(ranked)
    sys.stdout.write(text)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / ("feasibility.json" if args.json else "feasibility.txt")).write_text(text)
    return 0


def cmd_replay_check(args) -> int:
    sc = load_scenario(args.scenario, args.override)
    replay_check(sc)
    print(f"deterministic {sc.name} {sc.short_hash}")
    return 0


def _threshold(text):
    try:
        return dec(text)
    except (LendSimError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lendsim", description="Lending-market attack simulator")
    parser.add_argument("--version", action="version", version=f"lendsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("scenario", help="scenario file or bundled scenario name")
        p.add_argument("--override", action="append", default=[], metavar="PATH=VALUE", help="replace one scenario field")
        p.set_defaults(func=func)
        return p

    scenario_cmd("validate", cmd_validate, "check a scenario without running it")
    p = scenario_cmd("run", cmd_run, "simulate a scenario and write metrics")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p = scenario_cmd("sweep", cmd_sweep, "run one simulation per value of a field")
    p.add_argument("--param", required=True, help="dotted path of the field to vary")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    scenario_cmd("replay-check", cmd_replay_check, "run twice and compare the logs")

    p = sub.add_parser("analyze", help="rank assets in a liquidity snapshot")
    p.add_argument("snapshot", help="snapshot CSV or bundled snapshot name")
    p.add_argument("--available-threshold", type=_threshold, default=AVAILABLE_THRESHOLD)
    p.add_argument("--deposit-threshold", type=_threshold, default=DEPOSIT_THRESHOLD)
    p.add_argument("--json", action="store_true", help="print JSON instead of a table")
    p.add_argument("--out", help="also write the report into this directory")
    p.set_defaults(func=cmd_analyze)
    return parser


def _fail(code: int, kind: str, message: str, **extra) -> int:
    print(json.dumps({"error": kind, "message": message, **extra}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "override"):
        try:
            args.override = [parse_override(o) for o in args.override]
        except ConfigError as exc:
            return _fail(1, "config", exc.message, path=exc.path)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(1, "config", exc.message, path=exc.path)
    except DeterminismViolation as exc:
        return _fail(3, "determinism", str(exc), tick=exc.tick)
    except SimulationError as exc:
        return _fail(2, "simulation", str(exc), tick=exc.tick)
    except LendSimError as exc:
        return _fail(2, "simulation", f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
