"""Tidy result tables and their CSV / JSON serialisation."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Any, Sequence

from .combinatorics import match_pmf, match_tail, poisson_pmf
from .inference import TestResult
from .montecarlo import DispersionRow, IndicatorRow, JointStats, PowerCell

__all__ = [
    "ExperimentTable",
    "dispersion_table",
    "indicator_table",
    "joint_table",
    "pmf_table",
    "power_table",
    "relpower_table",
    "table1",
    "result_table",
]


@dataclass
class ExperimentTable:
    """Column names plus rows of plain Python values.

    ``float_columns`` are printed with ``decimals`` fixed decimals in CSV;
    other floats use their shortest round-trip repr.  ``None`` and NaN print
    as empty CSV fields and ``null`` in JSON.
    """

    columns: Sequence[str]
    rows: list[list[Any]]
    float_columns: frozenset[str] = frozenset()
    decimals: int = 6

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        if header:
            buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(self._cell(c, v) for c, v in zip(self.columns, row)) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        records = [{c: _jsonable(v) for c, v in zip(self.columns, row)} for row in self.rows]
        return json.dumps(records, indent=2) + "\n"

    def render(self, fmt: str = "csv", header: bool = True) -> str:
        if fmt == "csv":
            return self.to_csv(header)
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")

    def _cell(self, column: str, value: Any) -> str:
        if value is None or (isinstance(value, float) and math.isnan(value)):
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, float):
            if column in self.float_columns:
                return f"{value:.{self.decimals}f}"
            return repr(value)
        return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def table1(min_n: int = 4, max_n: int = 7, decimals: int = 4) -> ExperimentTable:
    """P(m = k) for each n in ``min_n..max_n`` alongside the Poisson(1) limit."""
    if min_n < 1 or max_n < min_n:
        raise ValueError("need 1 <= min_n <= max_n")
    ns = range(min_n, max_n + 1)
    columns = ["k", *(f"n_{n}" for n in ns), "poisson"]
    rows = [
        [k, *(match_pmf(n, k) if k <= n else None for n in ns), poisson_pmf(1.0, k)]
        for k in range(max_n + 1)
    ]
    return ExperimentTable(columns, rows, frozenset(columns[1:]), decimals)


def pmf_table(n: int, ks: Sequence[int], decimals: int = 6) -> ExperimentTable:
    rows = [[n, k, match_pmf(n, k), match_tail(n, k)] for k in ks]
    return ExperimentTable(["n", "k", "pmf", "tail"], rows, frozenset({"pmf", "tail"}), decimals)


def result_table(result: TestResult, decimals: int = 6) -> ExperimentTable:
    stat = result.statistic if result.mode == "t_test" else int(result.statistic)
    row = [result.n, stat, result.p_value, result.mode, result.alpha, result.reject]
    return ExperimentTable(
        ["n", "statistic", "p_value", "mode", "alpha", "reject"], [row], frozenset({"p_value"}), decimals
    )


_POWER_COLUMNS = ["n", "rho", "power_matching", "power_pearson", "reps", "mc_stderr"]


def power_table(cells: Sequence[PowerCell], decimals: int = 6) -> ExperimentTable:
    rows = [[c.n, c.rho, c.power_matching, c.power_pearson, c.reps_used, c.mc_stderr] for c in cells]
    return ExperimentTable(_POWER_COLUMNS, rows, frozenset(_POWER_COLUMNS[2:4] + ["mc_stderr"]), decimals)


def relpower_table(cells: Sequence[PowerCell], decimals: int = 6) -> ExperimentTable:
    t = power_table(cells, decimals)
    t.columns = [*_POWER_COLUMNS, "nominal_power"]
    for row, c in zip(t.rows, cells):
        row.append(c.nominal_power)
    return t


def joint_table(stats: Sequence[JointStats], decimals: int = 6) -> ExperimentTable:
    columns = ["n", "corr_m_rho", "corr_rho_tau", "std_slope", "r_squared", "sd_m", "sd_rho"]
    rows = [
        [s.n, s.corr_m_rho, s.corr_rho_tau, s.std_slope_m_rho, s.r_squared_m_rho, s.sd_m, s.sd_rho]
        for s in stats
    ]
    return ExperimentTable(columns, rows, frozenset(columns[1:]), decimals)


def dispersion_table(rows: Sequence[DispersionRow], decimals: int = 6) -> ExperimentTable:
    return ExperimentTable(
        ["n", "sd_m", "sd_rho"], [[r.n, r.sd_m, r.sd_rho] for r in rows], frozenset({"sd_m", "sd_rho"}), decimals
    )


def indicator_table(rows: Sequence[IndicatorRow], decimals: int = 6) -> ExperimentTable:
    return ExperimentTable(
        ["n", "rho", "bucket", "prob_overestimate", "count"],
        [[r.n, r.rho, r.m_bucket.value, r.prob_overestimate, r.bucket_count] for r in rows],
        frozenset({"prob_overestimate"}),
        decimals,
    )
