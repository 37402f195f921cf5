"""Command line: ``spinqtm sweep|accept|figure``."""

from __future__ import annotations

import argparse
import sys

from .acceptance import SUITES, recipe_path, run_acceptance
from .config import ConfigError, load_config
from .sweep import EXIT_FAILED, output_dir, run_sweep

FIGURES = ("fig2", "fig3", "fig4", "fig5")


def _sweep(cfg, args) -> int:
    if args.tol is not None:
        cfg = cfg.__class__(**{**cfg.__dict__, "tol": args.tol})
    res = run_sweep(cfg, output_dir(args.out), jobs=args.jobs)
    print(f"wrote {len(res.rows)} rows to {res.table}" + (f" ({res.flagged} flagged)" if res.flagged else ""))
    return res.exit_code


def _with_seed(cfg, seed):
    if seed is None or seed == cfg.seed:
        return cfg
    raw = dict(cfg.raw, seed=seed)
    from .config import parse_config
    return parse_config(raw, cfg.name)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinqtm", description="Spin-chain quantum thermal machines.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: $SPINQTM_OUT or the working directory)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for grid points")
    common.add_argument("--tol", type=float, default=None, help="fixed-point tolerance")
    common.add_argument("--seed", type=int, default=None, help="seed for random specs (unsigned 64-bit)")
    sub = p.add_subparsers(dest="verb", required=True)
    s = sub.add_parser("sweep", parents=[common], help="run a sweep described by a YAML config")
    s.add_argument("config")
    a = sub.add_parser("accept", parents=[common], help="run the acceptance suite")
    a.add_argument("suite", nargs="?", default=None,
                   help=f"suite ({', '.join(SUITES)}), criterion ids like c1,c5, or empty for all")
    f = sub.add_parser("figure", parents=[common], help="run a shipped figure recipe")
    f.add_argument("name", choices=FIGURES)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_FAILED
    try:
        if args.verb == "accept":
            results = run_acceptance(args.suite, output_dir(args.out), seed=args.seed or 0,
                                     tol=args.tol if args.tol is not None else 1e-12)
            return 0 if all(r.passed for r in results) else EXIT_FAILED
        path = recipe_path(args.name) if args.verb == "figure" else args.config
        cfg = _with_seed(load_config(path), args.seed)
        return _sweep(cfg, args)
    except (ConfigError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
