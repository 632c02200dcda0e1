"""Command-line entry point: ``cqec <experiment> [options]`` and ``cqec verify FILE``.

Exit codes: 0 success, 2 configuration error (or a failed verify), 3 when
some rows errored.
"""

from __future__ import annotations

import argparse
import json
import sys

from .exceptions import ConfigError
from .experiments import Experiment, ExperimentConfig, run, to_csv, verify_file, write_result

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARTIAL = 3


def _param(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqec", description="Catalytic recovery experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for exp in Experiment:
        p = sub.add_parser(exp.value, help=f"run the {exp.value} experiment")
        p.add_argument("--seed", type=_u64, default=0)
        p.add_argument("--algo", default=None,
                       help="benchmark state: qkan, qdrift, cfqpe, regev or ttn")
        p.add_argument("--out", default=None,
                       help="output prefix; .json and/or .csv are appended")
        p.add_argument("--format", choices=("structured", "table", "both"), default="both")
        p.add_argument("--ansatz-depth", type=int, choices=(1, 2, 3), default=1)
        p.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                       help="override a grid parameter; VALUE is parsed as JSON when possible")
        p.add_argument("--record-time", action="store_true",
                       help="store wall time in the provenance block (breaks byte reproducibility)")
    v = sub.add_parser("verify", help="re-hash a structured result file")
    v.add_argument("path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if args.command == "verify":
        try:
            ok = verify_file(args.path)
        except (OSError, ValueError) as exc:
            print(f"verify: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print("digest ok" if ok else "digest mismatch")
        return EXIT_OK if ok else EXIT_CONFIG
    try:
        cfg = ExperimentConfig(args.command, args.seed, args.algo, dict(args.param),
                               args.ansatz_depth, args.out)
        result = run(cfg, record_time=args.record_time)
        if cfg.out:
            for path in write_result(result, cfg.out, args.format):
                print(path)
        else:
            sys.stdout.write(to_csv(result.rows))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for err in result.errors:
        print(f"row {err['index']}: {err['error']}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
