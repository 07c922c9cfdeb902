"""Command-line interface.

Subcommands:
  run      experiment matrix (scenario + population -> report directory)
  replay   recompute metrics from a telemetry log
  stats    hypothesis report from a metrics table
  serve    start the live session service
  plot     render charts from a report directory
  population  write the built-in cohort to a file

Exit codes: 0 ok, 2 configuration error, 3 trial failures present.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .config import (
    ConfigError, load_population, load_scenario, save_population, scenario_from_dict,
)
from .experiment import (
    format_hypotheses, hypotheses_from_rows, rows_from_metrics_csv, run_matrix,
)
from .metrics import MetricError, compute_metrics
from .operator import DOMINANT, NONDOMINANT, default_population
from .params import Mode
from .session import read_telemetry
from .stats import StatsError


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario) if args.scenario else scenario_from_dict({})
        profiles = load_population(args.population)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    modes = tuple(Mode(m) for m in args.modes.split(","))
    hands = tuple(args.hands.split(","))
    for h in hands:
        if h not in (DOMINANT, NONDOMINANT):
            print(f"config error: hands: {h!r}", file=sys.stderr)
            return 2

    def progress(i, n, trial_id, metrics):
        note = f"rmspe={metrics.rmspe:.2f}%" if metrics else "FAILED"
        print(f"[{i:3d}/{n}] {trial_id:16s} {note}")

    report = run_matrix(
        profiles, scenario, modes=modes, hands=hands,
        master_seed=args.seed, out_dir=args.out,
        telemetry=not args.no_telemetry,
        progress=progress if not args.quiet else None,
    )
    print(format_hypotheses(report.hypotheses))
    print(f"report written to {args.out}")
    if report.failures:
        print(f"{len(report.failures)} trial(s) failed:", file=sys.stderr)
        for o in report.failures:
            print(f"  {o.trial_id}: {o.error}", file=sys.stderr)
        return 3
    return 0


def _cmd_replay(args) -> int:
    try:
        record = read_telemetry(args.log)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        metrics = compute_metrics(record)
    except MetricError as exc:
        print(f"cannot score: {exc}", file=sys.stderr)
        return 3
    payload = {"completed": record.completed, **metrics.as_dict()}
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_stats(args) -> int:
    try:
        rows = rows_from_metrics_csv(args.metrics)
        lines = hypotheses_from_rows(rows)
    except (OSError, KeyError, ValueError, StatsError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    print(format_hypotheses(lines))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host = args.bind or os.environ.get("SHAREDCTL_BIND", "127.0.0.1:8800")
    if ":" not in host:
        print("config error: bind must be host:port", file=sys.stderr)
        return 2
    addr, port = host.rsplit(":", 1)
    app = create_app(
        data_dir=args.data_dir or os.environ.get("SHAREDCTL_DATA_DIR", "./sessions"),
        max_sessions=args.max_sessions
        or int(os.environ.get("SHAREDCTL_MAX_SESSIONS", "8")),
        static_dir=args.static,
    )
    uvicorn.run(app, host=addr, port=int(port), log_level="info")
    return 0


def _cmd_plot(args) -> int:
    from . import plots

    try:
        written = plots.render_report(args.report, args.out or args.report)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


def _cmd_population(args) -> int:
    save_population(default_population(args.seed, args.n), args.out)
    print(args.out)
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="sharedctl", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run the experiment matrix")
    p.add_argument("--scenario", help="scenario YAML (defaults to the circle task)")
    p.add_argument("--population", default="default",
                   help="population YAML or 'default'")
    p.add_argument("--modes", default="standalone,shared,impedance")
    p.add_argument("--hands", default=f"{DOMINANT},{NONDOMINANT}")
    p.add_argument("--seed", type=int, default=20240613, help="master seed")
    p.add_argument("--out", default="report", help="report directory")
    p.add_argument("--no-telemetry", action="store_true",
                   help="skip per-trial telemetry logs")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("replay", help="metrics from a telemetry log")
    p.add_argument("log")
    p.set_defaults(fn=_cmd_replay)

    p = sub.add_parser("stats", help="hypothesis report from metrics.csv")
    p.add_argument("metrics")
    p.set_defaults(fn=_cmd_stats)

    p = sub.add_parser("serve", help="start the live session service")
    p.add_argument("--bind", help="host:port (env SHAREDCTL_BIND)")
    p.add_argument("--data-dir", help="telemetry directory (env SHAREDCTL_DATA_DIR)")
    p.add_argument("--max-sessions", type=int,
                   help="concurrent session cap (env SHAREDCTL_MAX_SESSIONS)")
    p.add_argument("--static", help="directory with the browser client build")
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("plot", help="render charts from a report directory")
    p.add_argument("report")
    p.add_argument("--out", help="output directory (defaults to the report dir)")
    p.set_defaults(fn=_cmd_plot)

    p = sub.add_parser("population", help="write the built-in cohort to a file")
    p.add_argument("--out", default="population.yaml")
    p.add_argument("--seed", type=int, default=20240613)
    p.add_argument("-n", type=int, default=10)
    p.set_defaults(fn=_cmd_population)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
