"""Command-line harness for the sweep experiments.

Two subcommands, ``sweep-snr`` and ``sweep-beta``, run the corresponding
sweep and write a CSV.  Exit status is 0 only when every point solved.
"""

import argparse
import sys

from .solver import SolverOptions
from .sweep import SweepConfig, emit_csv, run_beta_sweep, run_snr_sweep

_DEFAULTS = SolverOptions()


def _add_common(sub):
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--regime", choices=("hir", "lir"),
                       help="built-in scenario preset")
    group.add_argument("--scenario", metavar="FILE",
                       help="scenario file (key = value format)")
    sub.add_argument("--out", required=True, metavar="CSV",
                     help="output CSV path")
    sub.add_argument("--feas-tol", type=float, default=_DEFAULTS.feas_tol)
    sub.add_argument("--stat-tol", type=float, default=_DEFAULTS.stat_tol)
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for the random solver starts")
    sub.add_argument("--no-warm-start", action="store_true",
                     help="solve every point from a fresh random start")
    sub.add_argument("--parallel", type=int, default=1, metavar="N",
                     help="worker processes (requires --no-warm-start)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="coordlim",
        description="Information-constrained coordination sweeps over "
        "interference-channel scenarios",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    snr = subs.add_parser("sweep-snr", help="sweep the SNR in dB")
    _add_common(snr)
    snr.add_argument("--snr-min", type=float, default=-10.0)
    snr.add_argument("--snr-max", type=float, default=20.0)
    snr.add_argument("--snr-step", type=float, default=1.0)

    beta = subs.add_parser("sweep-beta", help="sweep the bandwidth ratio B1/B2")
    _add_common(beta)
    beta.add_argument("--beta-min", type=float, default=0.25)
    beta.add_argument("--beta-max", type=float, default=4.0)
    beta.add_argument("--beta-step", type=float, default=0.25)
    beta.add_argument("--snr-db", type=float, default=10.0,
                      help="fixed SNR for the beta sweep")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.parallel > 1 and not args.no_warm_start:
        parser.error("--parallel requires --no-warm-start")
    if args.parallel < 1:
        parser.error("--parallel must be at least 1")
    config = SweepConfig(
        regime=args.regime or args.scenario,
        solver=SolverOptions(feas_tol=args.feas_tol, stat_tol=args.stat_tol),
        seed=args.seed,
        warm_start=not args.no_warm_start,
        parallel=args.parallel,
    )
    if args.command == "sweep-snr":
        config.snr_grid = (args.snr_min, args.snr_max, args.snr_step)
        records = run_snr_sweep(config)
    else:
        config.beta_grid = (args.beta_min, args.beta_max, args.beta_step)
        config.beta_snr_db = args.snr_db
        records = run_beta_sweep(config)
    emit_csv(records, args.out)
    failures = sum(r.failed for r in records)
    print(
        f"{len(records)} points -> {args.out}"
        + (f" ({failures} failed)" if failures else ""),
        file=sys.stderr,
    )
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
