"""Command-line entry point: one subcommand per experiment kind.

    mbqrc ipc --config ipc.yaml --seed 7 --workers 4 --out results/ipc

Without ``--config`` the built-in defaults for the subcommand are used; a
master seed must then be given with ``--seed``.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import KINDS, ConfigError, load_config, make_config
from .experiments import run_experiment

log = logging.getLogger("mbqrc")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbqrc", description="Noisy quantum reservoir computing experiments")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", help="YAML or JSON experiment config")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--workers", type=int, default=1, help="worker processes [1]")
        p.add_argument("--out", default=None, help="output directory [results/<kind>]")
        p.add_argument("--scale", choices=["desk", "paper"], help="desk: L=10^4, paper: L=10^5")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.config:
            cfg = load_config(args.config, seed=args.seed, scale=args.scale)
            if cfg.kind != args.kind:
                raise ConfigError(f"config kind {cfg.kind!r} does not match subcommand {args.kind!r}")
        else:
            cfg = make_config({"kind": args.kind}, seed=args.seed, scale=args.scale)
    except (ConfigError, OSError) as exc:
        print(f"mbqrc: error: {exc}", file=sys.stderr)
        return 2
    if args.workers < 1:
        print("mbqrc: error: --workers must be >= 1", file=sys.stderr)
        return 2
    out = args.out or f"results/{args.kind}"
    log.info("running %s (config %s) into %s", cfg.kind, cfg.config_hash(), out)
    bundle = run_experiment(cfg, out, args.workers)
    for f in bundle.files:
        print(bundle.out_dir / f)
    print(bundle.manifest_path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
