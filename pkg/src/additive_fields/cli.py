"""Command-line entry point.

Subcommands: sample, render, cross, window, gumbel, blocking, slice3d.
Each takes --config <file> plus the overrides --seed, --workers and
--out <dir>. Exit codes: 0 success, 2 config error, 3 certificate
soundness violation, 4 non-embeddable kernel/grid pair.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import load_config, with_overrides
from .errors import (
    AdditiveFieldError,
    CertificateViolation,
    ConfigError,
    NonEmbeddable,
)
from .harness import run_experiment
from .kernels import Grid1D
from .sampler import derive_seed, dump_path, sample_path

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CERTIFICATE = 3
EXIT_NON_EMBEDDABLE = 4

COMMANDS = ("sample", "render", "cross", "window", "gumbel", "blocking", "slice3d")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="addfield",
        description="Additive Gaussian field simulation studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="experiment config file")
        cmd.add_argument("--seed", type=int, default=None, help="master seed override")
        cmd.add_argument("--workers", type=int, default=None, help="worker count override")
        cmd.add_argument("--out", default="out", help="output directory")
    return parser


def _run_sample(config, out_dir) -> int:
    """Draw one path of kernel1 over [0, sizes[0]] and dump it."""
    extent = config.sizes[0]
    grid = Grid1D(origin=0.0, eps=config.eps, count=int(round(extent / config.eps)) + 1)
    path = sample_path(config.kernel1, grid, derive_seed(config.master_seed, 0))
    os.makedirs(out_dir, exist_ok=True)
    destination = os.path.join(out_dir, "sample.anf")
    dump_path(path, destination)
    v = path.values
    print(f"wrote {destination}")
    print(
        f"count={grid.count} eps={grid.eps} seed={path.seed} "
        f"mean={v.mean():.6f} var={v.var():.6f} sup={v.max():.6f} inf={v.min():.6f} "
        f"clamped_mass={path.clamped_mass:.3e}"
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        experiment = None if args.command == "sample" else args.command
        config = with_overrides(
            config, seed=args.seed, workers=args.workers, experiment=experiment
        )
        if args.command == "sample":
            return _run_sample(config, args.out)
        written = run_experiment(config, args.out)
        for key, value in written.items():
            print(f"{key}: {value}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CertificateViolation as exc:
        print(f"certificate soundness violation: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    except NonEmbeddable as exc:
        print(f"non-embeddable kernel: {exc}", file=sys.stderr)
        return EXIT_NON_EMBEDDABLE
    except AdditiveFieldError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
