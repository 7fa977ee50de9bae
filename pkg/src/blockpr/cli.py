"""Command line interface: ``svd-table``, ``recover`` and ``sweep``."""

from __future__ import annotations

import argparse
import dataclasses
import csv
import logging
import sys

from .experiments import ALGORITHMS, ConfigError, load_config, parse_number, recover, run_sweep, write_csv
from .masks import parse_window
from .spectral import block_svd, singular_value_bins
from .sync import NoConvergence

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NO_CONVERGENCE = 3


def _fmt(x: float) -> str:
    return "inf" if x == float("inf") else repr(float(x))


def cmd_svd_table(args) -> int:
    window = parse_window(args.window, args.delta, args.d)
    svd = block_svd(window, 0.0)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["bin_lo", "bin_hi", "count"])
    for lo, hi, count in singular_value_bins(svd):
        writer.writerow([_fmt(lo), _fmt(hi), count])
    return EXIT_OK


def cmd_recover(args) -> int:
    report = recover(
        args.d,
        args.delta,
        args.window,
        args.epsilon,
        args.snr,
        args.seed,
        args.algorithm,
        args.magnitude_mode,
    )
    print(f"relative_error={report.error!r}")
    print(f"complete={'true' if report.complete else 'false'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    if args.workers is not None:
        config = dataclasses.replace(config, workers=args.workers)
    result = run_sweep(config)
    if args.out:
        write_csv(result, args.out)
    else:
        sys.stdout.write(result.to_csv())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blockpr", description="Ptychographic phase retrieval with subspace completion.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("svd-table", help="histogram of the singular values of the lifted operator")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--window", default="gaussian:0.3", help="gaussian:<sigma> or exp:<a>")
    p.set_defaults(func=cmd_svd_table)

    p = sub.add_parser("recover", help="reconstruct one random signal and report the error")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=int, required=True)
    p.add_argument("--window", default="gaussian:0.3")
    p.add_argument("--epsilon", type=parse_number, default=0.0, help="truncation threshold, e.g. 10^-2.5")
    p.add_argument("--snr", type=parse_number, default=float("inf"), help="SNR in dB or inf")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algorithm", choices=ALGORITHMS, default="blockpr_sc")
    p.add_argument("--magnitude-mode", choices=("block", "diagonal"), default="block")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("sweep", help="Monte Carlo sweep from a key=value config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV output path (stdout if omitted)")
    p.add_argument("--workers", type=int, help="override the number of worker processes")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
