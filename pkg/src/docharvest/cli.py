"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 stage failure or missing
stage input, 3 finished but some documents failed to annotate or score.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .pipeline import (
    ConfigError,
    StageFailure,
    StagePrereqMissing,
    collect_report,
    load_config,
    run_pipeline,
    verify_dataset,
    write_report,
)
from .pipeline.stats import STAGES

EXIT_OK, EXIT_CONFIG, EXIT_STAGE, EXIT_PARTIAL = 0, 1, 2, 3

logger = logging.getLogger("docharvest")


def _global_flags(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--config", type=Path, default=default, help="YAML pipeline configuration")
    parser.add_argument("--out", type=Path, default=default, help="output root (overrides the config)")
    parser.add_argument("--workers", type=int, default=default, help="worker count for every stage")
    parser.add_argument("--seed", type=int, default=default, help="shard shuffling seed (u64)")
    parser.add_argument("-v", "--verbose", action="store_true", default=default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docharvest", description="Build a document layout dataset.")
    _global_flags(parser, None)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "harvest": "extract Word URLs from the configured snapshots",
        "fetch": "download and screen the harvested URLs",
        "annotate": "colorize, render and box every stored document",
        "quality": "compute language, perplexity and reliability metadata",
        "emit": "write the filtered, sharded dataset",
        "stats": "write the CSV reports from existing stage outputs",
        "run": "all enabled stages in order, then the reports",
        "verify": "re-hash the dataset shards against the manifest",
    }
    for name, text in helps.items():
        # flags are accepted after the subcommand too; SUPPRESS keeps them from clobbering earlier ones
        _global_flags(sub.add_parser(name, help=text), argparse.SUPPRESS)
    return parser


def _configure(args):
    cfg = load_config(args.config)
    if args.out is not None:
        cfg.output = str(args.out.resolve())
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg.workers.harvest = cfg.workers.fetch = cfg.workers.annotate = args.workers
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _configure(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "verify":
            problems = verify_dataset(cfg.out / "dataset")
            for p in problems:
                print(p)
            if not problems:
                print("dataset intact")
            return EXIT_STAGE if problems else EXIT_OK
        if args.command == "stats":
            report = collect_report(cfg.out)
            write_report(report, cfg.out)
        else:
            only = None if args.command == "run" else [args.command]
            report = run_pipeline(cfg, only=only)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StagePrereqMissing as exc:
        print(f"missing stage input: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except (StageFailure, OSError) as exc:
        print(f"stage failed: {exc}", file=sys.stderr)
        return EXIT_STAGE

    for name in STAGES:
        c = report.stages.get(name)
        if c:
            print(f"{name}: {c.get('inputs', 0)} in, {c.get('outputs', 0)} out")
    bad = [s for s, ok in report.reconciliation().items() if not ok]
    if bad:
        print(f"counts do not reconcile for: {', '.join(bad)}", file=sys.stderr)
    return EXIT_PARTIAL if report.partial else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
