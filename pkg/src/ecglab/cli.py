"""Command line entry point: ``ecglab <experiment> [flags]``.

Exit codes: 0 success, 1 operational error, 2 validation failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .config import KINDS, MEASURES, MODELS, SUBGROUPS, ConfigError, parse_config
from .records import record_run, write_bundle
from .runner import run

log = logging.getLogger("ecglab")


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _weights(text: str):
    # "1,0" (one Z coordinate each) or "1:0,0:1" (Z^k vectors)
    parts = [p for p in text.split(",") if p.strip()]
    if any(":" in p for p in parts):
        return [[int(c) for c in p.split(":")] for p in parts]
    return [int(p) for p in parts]


def _assignment(text: str):
    # syllable strings per generator, e.g. "0,1" or "01,2"
    return [[int(c) for c in p.strip()] for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--seed", type=lambda s: int(s, 0))
    common.add_argument("--out", metavar="DIR")
    common.add_argument("--threads", type=int)
    common.add_argument("--model", choices=MODELS)
    common.add_argument("--d", type=int)
    common.add_argument("--subgroup", choices=SUBGROUPS)
    common.add_argument("--weights", type=_weights)
    common.add_argument("--assignment", type=_assignment)
    common.add_argument("--measure", choices=MEASURES)
    common.add_argument("--patterson-n", type=int)
    common.add_argument("--n-min", type=int)
    common.add_argument("--n-max", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--m-min", type=int)
    common.add_argument("--m-max", type=int)
    common.add_argument("--alpha", type=float)
    common.add_argument("--replicates", type=int)
    common.add_argument("--truncation", type=int)
    common.add_argument("--radii", type=_int_list)
    common.add_argument("--floor", type=float)
    common.add_argument("--slope", type=float)
    common.add_argument("--decay", type=float)
    common.add_argument("--no-plots", dest="plots", action="store_false", default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="ecglab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sub.add_parser(kind, parents=[common])
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "verbose")}
    try:
        cfg = parse_config(args.config, flags)
        t0 = time.perf_counter()
        bundle, ok = run(cfg)
        manifest = write_bundle(bundle, cfg.out)
        rec = record_run(cfg.snapshot(), manifest, cfg.out, time.perf_counter() - t0)
    except ConfigError as exc:
        print(f"ecglab: configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # operational failure
        print(f"ecglab: {cfg.kind if 'cfg' in locals() else args.kind} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for name in rec.outputs:
        log.info("wrote %s/%s", cfg.out, name)
    if ok is False:
        failed = ", ".join(bundle.summary.get("failed", []))
        print(f"ecglab: validation failed: {failed}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
