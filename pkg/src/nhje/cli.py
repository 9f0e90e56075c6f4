"""Command-line entry point.

Exit codes: 0 ok, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import config_from_dict, parse_config
from .errors import ConfigError, NHJEError, NumericalError
from .io import FORMATS
from .scenarios import PRESET_DESCRIPTIONS, PRESETS, apply_overrides, preset_configs, rerun, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
STAGES = ("simulate", "shots", "fine_scan", "bloch", "floquet", "revival", "survival")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="scenario config file")
    src.add_argument("--preset", help="built-in preset name (see 'presets list')")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--seed", type=_u64, help="override the master seed")
    p.add_argument("--steps", type=int, help="override the propagation step count")
    p.add_argument("--format", choices=FORMATS, default="csv")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nhje", description="Postselected non-Hermitian work statistics.")
    sub = ap.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="run the pipeline named in the config"))
    for stage in STAGES:
        _common(sub.add_parser(stage.replace("_", "-"), help=f"run the {stage} pipeline"))
    pr = sub.add_parser("presets", help="list built-in presets")
    pr.add_argument("action", choices=["list"])
    rr = sub.add_parser("rerun", help="re-execute the scenario recorded in an output file")
    rr.add_argument("file", type=Path)
    rr.add_argument("--out", type=Path, default=Path("."))
    rr.add_argument("--format", choices=FORMATS)
    return ap


def _load(args, pipeline):
    if args.preset:
        cfgs = preset_configs(args.preset)
    else:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.config}: {exc.strerror}") from None
        cfgs = [parse_config(text)]
    out = []
    for cfg in cfgs:
        raw = apply_overrides(cfg.raw, seed=args.seed, steps=args.steps, pipeline=pipeline)
        out.append(config_from_dict(raw))
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        for name in PRESETS:
            print(f"{name:8s} {PRESET_DESCRIPTIONS[name]}")
        return EXIT_OK
    stage = "rerun" if args.command == "rerun" else args.command
    try:
        if args.command == "rerun":
            paths = rerun(args.file, args.out, args.format)
        else:
            pipeline = None if args.command == "run" else args.command.replace("-", "_")
            cfgs = _load(args, pipeline)
            paths = []
            for cfg in cfgs:
                stage = cfg.pipeline
                paths += run_scenario(cfg, args.out, args.format)
    except ConfigError as exc:
        print(f"nhje: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"nhje: numerical failure in stage {stage}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NHJEError as exc:
        print(f"nhje: invalid input in stage {stage}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
