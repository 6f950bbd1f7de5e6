"""The matching-method test of independence and the Pearson correlation t-test.

The matching test is one-sided: large numbers of matched ranks are evidence
against independence.  Its p-value is ``P(m >= observed)`` under either the
exact rencontres distribution or the Poisson(1) limit.  The Pearson test is the
usual two-sided t-test of a zero population correlation.

Both tests reject when ``p_value <= alpha``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Literal, NamedTuple

import numpy as np
from scipy import special

from .combinatorics import match_tail, poisson_tail
from .errors import DegenerateR, NoRejectionRegion, SampleTooSmall
from .rank_stats import BivariateSample, RankedSample, matching_statistic, pearson_r

__all__ = [
    "MIN_TEST_N",
    "CriticalValue",
    "TestResult",
    "critical_m",
    "matching_p_value",
    "matching_test",
    "pearson_p_value",
    "pearson_test",
    "t_two_sided_p",
]

MIN_TEST_N = 4

MatchMode = Literal["exact", "asymptotic"]


@dataclass(frozen=True)
class TestResult:
    """Outcome of a single significance test."""

    __test__ = False  # keep pytest from collecting this class

    statistic: float
    p_value: float
    mode: str
    alpha: float
    reject: bool
    n: int

    def as_dict(self) -> dict:
        return asdict(self)


class CriticalValue(NamedTuple):
    """Smallest rejecting value of m and the size actually achieved with it."""

    k: int
    size: float


def matching_p_value(n: int, m: int, mode: MatchMode = "exact") -> float:
    """Upper-tail probability ``P(m' >= m)`` under independence."""
    if mode == "exact":
        return match_tail(n, m)
    if mode == "asymptotic":
        return poisson_tail(1.0, m)
    raise ValueError(f"mode must be 'exact' or 'asymptotic', got {mode!r}")


def matching_test(rs: RankedSample, mode: MatchMode = "exact", alpha: float = 0.05) -> TestResult:
    """Test independence by counting pairs with equal ranks.

    Raises :class:`SampleTooSmall` for fewer than four pairs.
    """
    _check_alpha(alpha)
    if rs.n < MIN_TEST_N:
        raise SampleTooSmall(f"the matching test needs n >= {MIN_TEST_N}, got n={rs.n}")
    m = matching_statistic(rs)
    p = matching_p_value(rs.n, m, mode)
    return TestResult(statistic=m, p_value=p, mode=mode, alpha=alpha, reject=p <= alpha, n=rs.n)


def critical_m(n: int, alpha: float, mode: MatchMode = "exact") -> CriticalValue:
    """Smallest k in ``1..n`` whose upper tail is ``<= alpha``.

    >>> critical_m(100, 0.05, "asymptotic").k
    4
    """
    _check_alpha(alpha)
    if n < MIN_TEST_N:
        raise SampleTooSmall(f"the matching test needs n >= {MIN_TEST_N}, got n={n}")
    # tails are nonincreasing in k, so the first hit is the smallest
    for k in range(1, n + 1):
        size = matching_p_value(n, k, mode)
        if size <= alpha:
            return CriticalValue(k, size)
    raise NoRejectionRegion(
        f"no value of m has {mode} tail probability <= {alpha} at n={n} "
        f"(smallest attainable is {matching_p_value(n, n, mode):.6g})"
    )


def t_two_sided_p(t, df):
    """Two-sided p-value of a Student-t statistic, ``I_{df/(df+t^2)}(df/2, 1/2)``.

    Works elementwise on arrays; infinite ``t`` gives 0.
    """
    t = np.asarray(t, dtype=float)
    df = np.asarray(df, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        x = np.where(np.isinf(t), 0.0, df / (df + t * t))
    p = special.betainc(df / 2.0, 0.5, x)
    return float(p) if p.ndim == 0 else p


def pearson_p_value(r, n):
    """Two-sided p-value for a sample correlation ``r`` from ``n`` pairs.

    Uses ``t = r * sqrt((n - 2) / (1 - r^2))`` on ``n - 2`` degrees of
    freedom.  Accepts arrays.
    """
    r = np.asarray(r, dtype=float)
    df = np.asarray(n, dtype=float) - 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = r * np.sqrt(df / (1.0 - r * r))
    t = np.where(np.abs(r) >= 1.0, np.inf, t)
    return t_two_sided_p(t, df)


def pearson_test(s: BivariateSample, alpha: float = 0.05) -> TestResult:
    """Two-sided t-test of zero correlation.

    A perfectly linear sample gives ``p_value == 0`` and emits a
    :class:`DegenerateR` warning.
    """
    _check_alpha(alpha)
    if s.n < MIN_TEST_N:
        raise SampleTooSmall(f"the correlation test needs n >= {MIN_TEST_N}, got n={s.n}")
    r = pearson_r(s)
    if abs(r) == 1.0:
        warnings.warn("|r| == 1, reporting p = 0", DegenerateR, stacklevel=2)
        p = 0.0
    else:
        p = pearson_p_value(r, s.n)
    return TestResult(statistic=r, p_value=p, mode="t_test", alpha=alpha, reject=p <= alpha, n=s.n)


def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0) or math.isnan(alpha):
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha!r}")
