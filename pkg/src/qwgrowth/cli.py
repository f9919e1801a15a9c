"""Command-line entry point.

Subcommands: simulate | lln | cov | sde | asympt | verify. Each takes
--config PATH (JSON; see harness.CONFIG_SCHEMA), with --seed / --workers /
--out overriding the config. Exit code 0 iff every check row passed.
"""

import argparse
import sys

from .harness import load_config, run_experiment

KINDS = ("simulate", "lln", "cov", "sde", "asympt", "verify")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qwgrowth",
        description="Simulation and numerical verification for an anisotropic "
                    "(2+1)-dimensional growth model built on interlacing arrays.")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind)
        sp.add_argument("--config", default=None,
                        help="JSON config file (defaults to a minimal config)")
        sp.add_argument("--seed", type=int, default=None, help="master seed")
        sp.add_argument("--workers", type=int, default=None,
                        help="parallel replica workers")
        sp.add_argument("--out", default=None, help="output directory")
        if kind == "verify":
            sp.add_argument("--checks", nargs="*", default=None,
                            help="subset of named checks (default: all)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.config:
        cfg = load_config(args.config)
        if cfg["experiment"] != args.command:
            print("config is for %r, invoked as %r"
                  % (cfg["experiment"], args.command), file=sys.stderr)
            return 2
    else:
        cfg = load_config({"experiment": args.command, "seed": 0})
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.workers is not None:
        cfg["workers"] = args.workers
    if getattr(args, "checks", None):
        cfg.setdefault("params", {})["checks"] = args.checks
    report = run_experiment(cfg, outdir=args.out)
    for row in report.rows:
        status = "PASS" if row.passed else "FAIL"
        extra = "" if row.z is None else " z=%.2f" % row.z
        print("[%s] %s expected=%.10g got=%.10g%s"
              % (status, row.quantity, row.expected, row.estimate, extra))
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
