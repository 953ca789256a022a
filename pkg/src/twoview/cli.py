"""Command-line driver: run, validate, presets.

Exit codes: 0 success, 1 validation/pipeline error, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .core import PipelineConfig
from .errors import TwoViewError, UnknownPresetError
from .evaluate import (
    PRESETS,
    aggregate,
    config_fingerprint,
    config_from_text,
    config_to_text,
    preset,
    render_report,
)
from .fileio import classify_file, load_manifest
from .pipeline import run_manifest


def _resolve_config(args) -> PipelineConfig:
    if args.preset:
        cfg = preset(args.preset)
    else:
        cfg = config_from_text(Path(args.config).read_text(encoding="utf-8"))
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, rng_seed=args.seed)
    return cfg


def cmd_run(args) -> int:
    try:
        cfg = _resolve_config(args)
        manifest = load_manifest(args.manifest)
        records = run_manifest(manifest, cfg, jobs=args.jobs)
        report = aggregate(records, config_fingerprint(cfg))
    except UnknownPresetError as e:
        print(f"UNKNOWN_PRESET: {e}", file=sys.stderr)
        return 1
    except TwoViewError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    text = render_report(records, report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_validate(args) -> int:
    failed = False
    for path in args.paths:
        verdict = classify_file(path)
        print(f"{path}\t{verdict}")
        failed = failed or verdict != "OK"
    return 1 if failed else 0


def cmd_presets(args) -> int:
    names = [args.name] if args.name else sorted(PRESETS)
    for name in names:
        try:
            cfg = preset(name)
        except UnknownPresetError as e:
            print(f"UNKNOWN_PRESET: {e}", file=sys.stderr)
            return 1
        fields = config_to_text(cfg).strip().replace("\n", " ")
        print(f"{name}\t{fields}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twoview", description="Two-view match verification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="process a pair manifest and emit a report")
    run.add_argument("--manifest", required=True)
    group = run.add_mutually_exclusive_group(required=True)
    group.add_argument("--preset", help="submission preset name")
    group.add_argument("--config", help="key=value config file")
    run.add_argument("--out", help="report path (default: stdout)")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--seed", type=int, default=None)
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate", help="check MFK1/MMT1/manifest files")
    validate.add_argument("paths", nargs="+")
    validate.set_defaults(func=cmd_validate)

    presets = sub.add_parser("presets", help="list submission presets")
    presets.add_argument("--name", default=None)
    presets.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
