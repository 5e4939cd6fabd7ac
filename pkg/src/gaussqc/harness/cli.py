"""Command line entry point.

Exit status is 0 when every acceptance flag holds, 1 when any fails and 2
on usage, configuration or capacity errors.
"""

import argparse
import json
import os
import sys

from ..errors import CapacityError, ConfigError, DomainError
from .config import EXPERIMENTS, apply_override, config_from_dict, load_config_file
from .runner import merge_reports, report_from_dict, run_experiment

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _add_run_options(p):
    p.add_argument("--config", help="YAML file with experiment settings")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--trials", type=int, help="number of trials")
    p.add_argument("--trial-start", type=int, help="index of the first trial (for split runs)")
    p.add_argument("--out", help="output directory for report.json and trials.csv")
    p.add_argument("--workers", help="worker processes, an integer or 'auto'")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry, e.g. channel.params.p=0.1 (repeatable)")


def build_parser():
    parser = argparse.ArgumentParser(prog="gaussqc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _add_run_options(sub.add_parser(name, help=f"run the {name} experiment"))
    m = sub.add_parser("merge", help="pool reports from disjoint trial ranges")
    m.add_argument("reports", nargs="+", help="report.json files or directories holding one")
    m.add_argument("--out", required=True)
    return parser


def _config_from_args(args):
    data = load_config_file(args.config) if args.config else {}
    if data.get("experiment", args.command) != args.command:
        raise ConfigError("experiment", f"config is for {data['experiment']!r}, not {args.command!r}")
    data["experiment"] = args.command
    for item in args.set:
        apply_override(data, item)
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.trials is not None:
        data["trials"] = args.trials
    if args.trial_start is not None:
        data["trial_start"] = args.trial_start
    if args.out is not None:
        data["output_path"] = args.out
    if args.workers is not None:
        data["parallelism"] = "auto" if args.workers == "auto" else _parse_int("--workers", args.workers)
    return config_from_dict(data)


def _parse_int(path, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(path, f"expected an integer or 'auto', got {raw!r}") from None


def _load_report(path):
    if os.path.isdir(path):
        path = os.path.join(path, "report.json")
    try:
        with open(path) as fh:
            return report_from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _summary(report, out_dir, stream):
    for k, v in sorted(report.acceptance.items()):
        print(f"{'PASS' if v else 'FAIL'} {k}", file=stream)
    agg = report.aggregates
    print(
        f"trials ok={agg['trials_ok']} degenerate={agg['trials_degenerate']} "
        f"wall={report.wall_clock_seconds:.2f}s -> {out_dir}",
        file=stream,
    )


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "merge":
            report = merge_reports([_load_report(p) for p in args.reports])
            out_dir = args.out
        else:
            config = _config_from_args(args)
            report = run_experiment(config)
            out_dir = config.output_path
        report.write(out_dir)
    except (ConfigError, CapacityError, DomainError) as exc:
        print(f"gaussqc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _summary(report, out_dir, sys.stdout)
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
