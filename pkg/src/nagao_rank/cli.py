"""Command line entry point: ``nagao-rank run | report | corpus list``."""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .errors import NagaoError
from .family import CORPUS_CONFIGS, corpus_family
from .runner import RunConfig, report, run


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nagao-rank", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="compute fibral averages and the rank estimate")
    r.add_argument("--family", help="family INI file or corpus name")
    r.add_argument("--xmax", type=int, default=10_000)
    r.add_argument("--mode", choices=["elliptic", "combined"])
    r.add_argument("--bmax", type=int, default=500, help="genus-2 F_{p^2} pass cutoff")
    r.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    r.add_argument("--checkpoint-every", type=int, default=500, help="primes per checkpoint")
    r.add_argument("--out-dir", default=".")
    r.add_argument("--census", action="store_true", help="also write the singular-fiber census CSV")
    r.add_argument("--crosscheck-cutoff", type=int, default=101)
    r.add_argument("--record-elapsed", action="store_true",
                   help="write wall-clock ms into the CSV (breaks byte-identical output)")
    r.add_argument("--resume", metavar="CHECKPOINT", help="continue from a checkpoint JSON")

    rep = sub.add_parser("report", help="summarise a checkpoint JSON or per-prime CSV")
    rep.add_argument("artifact")

    c = sub.add_parser("corpus", help="built-in families")
    c.add_argument("action", choices=["list"])
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "corpus":
            for name in CORPUS_CONFIGS:
                fam = corpus_family(name)
                print(f"{name}\tgenus {fam.genus}\tdegree {fam.x_degree}")
            return 0
        if args.command == "report":
            print(report(args.artifact).text)
            return 0
        if args.resume:
            result = run(RunConfig(family=""), resume=args.resume)
        else:
            if not args.family:
                print("error: --family is required unless --resume is given", file=sys.stderr)
                return 2
            cfg = RunConfig(
                family=args.family,
                x_max=args.xmax,
                mode=args.mode,
                b_max=args.bmax,
                workers=args.workers,
                checkpoint_every=args.checkpoint_every,
                out_dir=args.out_dir,
                census=args.census,
                crosscheck_cutoff=args.crosscheck_cutoff,
                record_elapsed=args.record_elapsed,
            )
            result = run(cfg)
        print(report(result.paths["checkpoint"]).text)
        return 0
    except (NagaoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
