"""Command line entry point ``crowdctl <scale> --config <file> [overrides]``."""
from __future__ import annotations

import argparse
import sys

from .errors import ConfigError
from .harness import EXIT_CONFIG, OUTPUT_ENV, SCALES, apply_overrides, parse_config, run


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="crowdctl",
        description="Multiscale Riccati-controlled particle experiments.",
        epilog=f"Output directory defaults to ${OUTPUT_ENV} or ./crowdctl-out.",
    )
    p.add_argument("scale", choices=SCALES)
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--alpha", help="control weight, or comma-separated sweep")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--T", dest="T", type=float, help="terminal time")
    p.add_argument("--N", dest="N", type=int, help="number of particles")
    p.add_argument("--Nx", dest="Nx", type=int, help="number of hydro cells")
    p.add_argument("--cfl", type=float)
    p.add_argument("--closure", choices=("mono-kinetic", "grad"))
    p.add_argument("--quiet", action="store_true", help="do not print the summary")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        cfg = apply_overrides(cfg, scale=args.scale, alpha=args.alpha, seed=args.seed, out=args.out,
                              T=args.T, N=args.N, Nx=args.Nx, cfl=args.cfl, closure=args.closure)
    except ConfigError as exc:
        print(f"crowdctl: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(cfg)
    except OSError as exc:
        print(f"crowdctl: {exc}", file=sys.stderr)
        return 1
    stream = sys.stderr if result.exit_status else sys.stdout
    if not args.quiet or result.exit_status:
        stream.write(result.summary)
    return result.exit_status


if __name__ == "__main__":
    sys.exit(main())
