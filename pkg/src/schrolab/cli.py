"""Command-line entry point.

    python -m schrolab <kind> --config run.yaml [--out DIR] [--seed N]
                              [--format json|csv] [--threads N]

Exit codes: 0 success, 2 validation error, 3 resolution or coverage error,
4 I/O error. Failures print a JSON error record on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from .config import KINDS, ExperimentConfig, load_config
from .errors import ConfigError, LabError
from .runner import emit, run


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="schrolab", description="Schrodinger propagator experiments")
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", type=Path, help="JSON or YAML config file")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--format", choices=("json", "csv"), help="report format")
        sp.add_argument("--threads", type=int, help="worker threads (performance only)")
    return ap


def _error(kind: str, exc: BaseException, code: int) -> int:
    record = {"error": type(exc).__name__, "exit_code": code, "experiment": kind, "message": str(exc)}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = load_config(args.config)
            if cfg.kind != args.kind:
                raise ConfigError(f"config is for {cfg.kind!r}, not {args.kind!r}")
        else:
            cfg = ExperimentConfig(args.kind)
        cfg = cfg.with_overrides(seed=args.seed, threads=args.threads, out=args.out, format=args.format)
        out = Path(cfg.output.dir)
        report = run(cfg, out)
        for path in emit(report, out, cfg.output.format):
            print(path)
        return 0
    except LabError as exc:
        return _error(args.kind, exc, exc.exit_code)
    except (OSError, UnicodeDecodeError) as exc:
        return _error(args.kind, exc, 4)
    except (ValueError, yaml.YAMLError) as exc:
        # malformed JSON/YAML and similar parse failures
        return _error(args.kind, exc, 2)


if __name__ == "__main__":
    sys.exit(main())
