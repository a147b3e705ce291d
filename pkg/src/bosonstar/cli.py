"""Command line interface.

    bosonstar run <config.json> [--out DIR] [--threads N] [--seed S]
    bosonstar validate <config.json>
    bosonstar report <DIR>

Exit codes: 0 all quantitative checks passed, 2 a check failed, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import BosonStarError, ConfigInvalid
from .experiments import run_experiment, validate_config


def _load_config(path):
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid([f"config file not found: {path}"])
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid([f"config is not valid JSON: {exc}"])
    if not isinstance(data, dict):
        raise ConfigInvalid(["config root must be a JSON object"])
    return data


def _cmd_run(args):
    data = _load_config(args.config)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.threads is not None:
        data["threads"] = args.threads
    cfg = validate_config(data)
    out = args.out or f"out_{cfg.experiment}"
    reports = run_experiment(cfg, out=out)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.experiment}/{r.law}: fitted={r.fitted:.6g} "
              f"predicted={r.predicted:.6g} tol={r.tolerance:.3g}")
    print(f"wrote {out}/report.json")
    return 0 if all(r.passed for r in reports) else 2


def _cmd_validate(args):
    data = _load_config(args.config)
    validate_config(data)
    print(f"config ok: {args.config}")
    return 0


def _cmd_report(args):
    path = Path(args.dir) / "report.json"
    if not path.exists():
        print(f"no report.json under {args.dir}", file=sys.stderr)
        return 1
    with open(path) as fh:
        payload = json.load(fh)
    print(f"experiment: {payload['experiment']} (seed {payload.get('seed')})")
    for r in payload["reports"]:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"  [{status}] {r['law']}")
        print(f"         fitted={r['fitted']:.6g} predicted={r['predicted']:.6g} "
              f"tol={r['tolerance']:.3g} window={r['fit_window']}")
    print("all passed" if payload["all_passed"] else "FAILURES present")
    return 0 if payload["all_passed"] else 2


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bosonstar",
        description="Pseudospectral simulator and verification harness for "
                    "the semi-relativistic Hartree equation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--threads", type=int, default=None)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.set_defaults(fn=_cmd_run)

    p_val = sub.add_parser("validate", help="validate a config without running")
    p_val.add_argument("config")
    p_val.set_defaults(fn=_cmd_validate)

    p_rep = sub.add_parser("report", help="pretty-print a run's report")
    p_rep.add_argument("dir")
    p_rep.set_defaults(fn=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ConfigInvalid as exc:
        for msg in exc.messages:
            print(f"config error: {msg}", file=sys.stderr)
        return 1
    except BosonStarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
