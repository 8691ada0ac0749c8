"""Command line interface.

Subcommands: synthetic, tu, ablate, expressiveness, scaling, embed-dump.
Global flags: --config PATH (flat key = value file), --seed N, --out DIR.
Every config key is also a flag; command-line values override the file.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import RunConfig, UsageError, build_config, parse_config_file
from .graphs import GraphDataError
from .models import TrainingDiverged
from .runner import TASKS

_FLAG_HELP = {
    "model": "model to train: msh, gcn, or gat",
    "seed": "RNG seed for the whole run",
    "out": "output directory for report.json and friends",
    "data": "directory holding a TU-format dataset",
    "dataset_name": "TU dataset name (file prefix)",
    "frequencies": "comma-separated modulation frequencies, overrides the schedule",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; this artifact reserves 2 for data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self._usage_exit(message))

    @staticmethod
    def _usage_exit(message) -> int:
        print(f"error: {message}", file=sys.stderr)
        return 1


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, metavar="PATH",
                        help="flat key = value config file")
    for name, kind in ((f.name, f.type) for f in RunConfig.__dataclass_fields__.values()):
        if name == "task":
            continue
        flag = "--" + name.replace("_", "-")
        caster = {"int": int, "float": float}.get(kind, str)
        parser.add_argument(flag, dest=name, type=caster, default=None,
                            help=_FLAG_HELP.get(name, argparse.SUPPRESS))


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mshgnn", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="task", required=True, metavar="TASK")
    for task in TASKS:
        task_parser = sub.add_parser(task, help=f"run the {task} task")
        _add_config_flags(task_parser)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cli_values = {key: value for key, value in vars(args).items()
                      if key not in ("task", "config") and value is not None}
        cfg = build_config(args.task, file_values, cli_values)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: config file not found: {exc.filename}", file=sys.stderr)
        return 1

    try:
        payload = TASKS[args.task](cfg)
    except (GraphDataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except TrainingDiverged as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3

    summary = payload.get("test_accuracy_mean")
    if summary is not None:
        print(f"{args.task}: test accuracy {summary:.4f} "
              f"+/- {payload.get('test_accuracy_std', 0.0):.4f} -> {cfg.out}/report.json")
    else:
        print(f"{args.task}: done -> {cfg.out}/report.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
