"""Command-line interface.

Exit status is 0 on success, 1 on a usage error and 2 on a data error (ties
under the ``reject`` policy, too few rows, unparseable input).
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from pathlib import Path
from typing import Sequence

from . import montecarlo as mc
from .errors import DataError, NoRejectionRegion
from .inference import matching_test
from .rank_stats import BivariateSample
from .streams import Stream
from .tables import (
    ExperimentTable,
    dispersion_table,
    indicator_table,
    joint_table,
    pmf_table,
    power_table,
    relpower_table,
    result_table,
    table1,
)

SEED_ENV = "MATCHSTAT_SEED"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer: {text!r}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _probability(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1: {text!r}")
    return value


def _output_flags(p: argparse.ArgumentParser, decimals: int = 6) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default: csv)")
    p.add_argument("--out", type=Path, help="write to this file instead of stdout")
    p.add_argument("--no-header", action="store_true", help="omit the CSV header row")
    p.add_argument("--decimals", type=int, default=decimals, help=f"decimals for probabilities in CSV (default: {decimals})")


def _experiment_flags(p: argparse.ArgumentParser, n_default: str, rho: bool = True, rule: bool = False) -> None:
    p.add_argument("--reps", type=_positive_int, default=100_000, help="replications per cell (default: 100000)")
    p.add_argument("--seed", type=_u64, help=f"master seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--n", type=_positive_int, action="append", help=f"sample size, repeatable (default: {n_default})")
    if rho:
        p.add_argument("--rho", type=float, action="append", help="population correlation, repeatable")
    if rule:
        p.add_argument(
            "--rule",
            choices=("m-ge-4", "exact-alpha"),
            default="m-ge-4",
            help="matching rejection rule: m >= 4, or the exact critical value at --alpha (default: m-ge-4)",
        )
        p.add_argument("--alpha", type=_probability, default=0.05, help="significance level (default: 0.05)")
    p.add_argument("--workers", type=_positive_int, default=1, help="worker threads; does not change results")
    _output_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="matchstat", description="Matching statistic distribution, tests and simulations.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("table1", help="exact P(m = k) for a range of n next to Poisson(1)")
    p.add_argument("--min-n", type=_positive_int, default=4)
    p.add_argument("--max-n", type=_positive_int, default=7)
    _output_flags(p, decimals=4)

    p = sub.add_parser("pmf", help="P(m = k) and P(m >= k) for one n")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--k", type=int, action="append", help="value of m, repeatable (default: 0..n)")
    _output_flags(p)

    p = sub.add_parser("test", help="matching test on a two-column delimited file")
    p.add_argument("--input", type=Path, required=True, help="file with x,y pairs; a header row is optional")
    p.add_argument("--mode", choices=("exact", "asymptotic"), default="exact")
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--tie-policy", choices=("reject", "random"), default="reject")
    p.add_argument("--seed", type=_u64, help=f"seed for random tie breaking (default: ${SEED_ENV} or 0)")
    p.add_argument("--delimiter", default=",", help="field delimiter (default: ',')")
    _output_flags(p)

    p = sub.add_parser("power", help="power grid of the matching and Pearson tests")
    _experiment_flags(p, "10 30 50 100 200", rule=True)

    p = sub.add_parser("relpower", help="matching power where the Pearson test has 50-80%% power")
    _experiment_flags(p, "10 30 50 100", rho=False, rule=True)

    p = sub.add_parser("rae", help="null correlations of m with Spearman's rho and Kendall's tau")
    _experiment_flags(p, "10 50", rho=False)

    p = sub.add_parser("dispersion", help="null standard deviations of m and Spearman's rho")
    _experiment_flags(p, "10 50", rho=False)

    p = sub.add_parser("indicator", help="P(r > rho) conditional on m < 1, m = 1, m > 1")
    _experiment_flags(p, "15")

    return parser


def _seed(args: argparse.Namespace) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return 0
    try:
        return _u64(env.strip())
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"${SEED_ENV}: {exc}") from None


_RULES = {"m-ge-4": "fixed_m_ge_4", "exact-alpha": "exact_alpha"}


def read_pairs(path: Path, delimiter: str = ",") -> BivariateSample:
    """Read ``x, y`` rows; the first row is treated as a header if it is not numeric."""
    xs: list[float] = []
    ys: list[float] = []
    try:
        handle = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    with handle:
        for lineno, row in enumerate(csv.reader(handle, delimiter=delimiter), start=1):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 2:
                raise DataError(f"{path}:{lineno}: expected 2 fields, found {len(row)}")
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError:
                if not xs and lineno == 1:
                    continue  # header
                raise DataError(f"{path}:{lineno}: cannot parse {row!r} as two numbers") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise DataError(f"{path}:{lineno}: values must be finite")
            xs.append(x)
            ys.append(y)
    if len(xs) < 4:
        raise DataError(f"{path}: need at least 4 rows, found {len(xs)}")
    return BivariateSample(xs, ys)


def _run(args: argparse.Namespace) -> ExperimentTable:
    cmd = args.command
    if cmd == "table1":
        if args.max_n < args.min_n:
            raise UsageError("--max-n must be >= --min-n")
        return table1(args.min_n, args.max_n, args.decimals)
    if cmd == "pmf":
        ks = args.k if args.k else list(range(args.n + 1))
        return pmf_table(args.n, ks, args.decimals)
    if cmd == "test":
        sample = read_pairs(args.input, args.delimiter)
        ranked = sample.rank(args.tie_policy, _seed(args))
        return result_table(matching_test(ranked, args.mode, args.alpha), args.decimals)

    seed = _seed(args)
    try:
        if cmd in ("power", "relpower"):
            n_default = mc.DEFAULT_N_GRID if cmd == "power" else tuple(mc.RELATIVE_POWER_GRID)
            config = mc.ExperimentConfig(
                n_list=tuple(args.n or n_default),
                rho_list=tuple(getattr(args, "rho", None) or mc.DEFAULT_RHO_GRID),
                reps=args.reps,
                master_seed=seed,
                alpha=args.alpha,
                rejection_rule=_RULES[args.rule],
            )
            if cmd == "power":
                return power_table(mc.power_experiment(config, args.workers), args.decimals)
            return relpower_table(mc.relative_power_experiment(config, args.workers), args.decimals)
        if cmd == "rae":
            root = Stream(seed)
            stats = [
                mc.joint_distribution_experiment(n, args.reps, root.cell(i), args.workers)
                for i, n in enumerate(args.n or (10, 50))
            ]
            return joint_table(stats, args.decimals)
        if cmd == "dispersion":
            rows = mc.dispersion_experiment(args.n or (10, 50), args.reps, seed, args.workers)
            return dispersion_table(rows, args.decimals)
        if cmd == "indicator":
            rhos = args.rho or mc.DEFAULT_RHO_GRID
            rows = []
            for j, n in enumerate(args.n or (15,)):
                base = Stream(seed, j * len(rhos))
                rows.extend(mc.error_sign_experiment(n, rhos, args.reps, base, args.workers))
            return indicator_table(rows, args.decimals)
    except (ValueError, NoRejectionRegion) as exc:
        if isinstance(exc, DataError):
            raise
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown command {cmd!r}")


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    """Execute one subcommand; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        table = _run(args)
        text = table.render(args.format, header=not args.no_header)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (DataError, NoRejectionRegion) as exc:
        print(f"data error: {exc}", file=stderr)
        return EXIT_DATA
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    if args.out is not None:
        args.out.write_text(text, newline="\n")
    else:
        stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
