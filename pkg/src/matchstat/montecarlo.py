"""Seeded Monte Carlo experiments on the matching statistic.

Five experiments are provided:

* :func:`power_experiment` - rejection rates of the matching test and the
  Pearson t-test over an ``(n, rho)`` grid;
* :func:`relative_power_experiment` - the same engine at the correlations
  where the t-test has 50/60/70/80% power;
* :func:`joint_distribution_experiment` - null correlations among m,
  Spearman's rho and Kendall's tau;
* :func:`dispersion_experiment` - null standard deviations of m and rho
  across sample sizes;
* :func:`error_sign_experiment` - how often Pearson's r overshoots the
  population correlation given whether m is below, at, or above 1.

Samples are bivariate standard normal.  Replications are processed in fixed
blocks of :data:`CHUNK_REPS`; every random number is addressed by
``(seed, cell, replication)`` through :class:`~matchstat.streams.Stream`, so
the number of worker threads changes only the schedule, never the result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Literal, Sequence, TypeVar, Union

import numpy as np

from .errors import NoRejectionRegion
from .inference import critical_m, pearson_p_value
from .rank_stats import BivariateSample
from .streams import Stream

__all__ = [
    "CHUNK_REPS",
    "DEFAULT_N_GRID",
    "DEFAULT_RHO_GRID",
    "RELATIVE_POWER_GRID",
    "Bucket",
    "DispersionRow",
    "ExperimentConfig",
    "IndicatorRow",
    "JointStats",
    "PowerCell",
    "bivariate_normal_sample",
    "dispersion_experiment",
    "error_sign_experiment",
    "joint_distribution_experiment",
    "matching_rejection_threshold",
    "power_experiment",
    "relative_power_experiment",
]

CHUNK_REPS = 4096

DEFAULT_N_GRID = (10, 30, 50, 100, 200)
DEFAULT_RHO_GRID = (-0.7, -0.525, -0.35, -0.175, 0.0, 0.175, 0.35, 0.525, 0.7)

# Correlations at which the two-sided Pearson test (alpha = .05) has the keyed
# nominal power, per sample size.
RELATIVE_POWER_GRID: dict[int, tuple[tuple[float, float], ...]] = {
    10: ((0.50, 0.62), (0.60, 0.67), (0.70, 0.72), (0.80, 0.78)),
    30: ((0.50, 0.36), (0.60, 0.40), (0.70, 0.442), (0.80, 0.49)),
    50: ((0.50, 0.277), (0.60, 0.311), (0.70, 0.346), (0.80, 0.386)),
    100: ((0.50, 0.196), (0.60, 0.221), (0.70, 0.247), (0.80, 0.277)),
}

RejectionRule = Literal["fixed_m_ge_4", "exact_alpha"]
StreamLike = Union[int, Stream]
T = TypeVar("T")


@dataclass(frozen=True)
class ExperimentConfig:
    n_list: tuple[int, ...] = DEFAULT_N_GRID
    rho_list: tuple[float, ...] = DEFAULT_RHO_GRID
    reps: int = 100_000
    master_seed: int = 0
    alpha: float = 0.05
    rejection_rule: RejectionRule = "fixed_m_ge_4"

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "rho_list", tuple(float(r) for r in self.rho_list))
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if any(n < 2 for n in self.n_list):
            raise ValueError("every n must be at least 2")
        if any(not abs(r) < 1.0 for r in self.rho_list):
            raise ValueError("every rho must satisfy |rho| < 1")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.rejection_rule not in ("fixed_m_ge_4", "exact_alpha"):
            raise ValueError(f"unknown rejection rule {self.rejection_rule!r}")
        Stream(self.master_seed)  # validates the seed range

    def cells(self) -> list[tuple[int, float]]:
        """Grid cells in index order: n-major, then rho."""
        return [(n, rho) for n in self.n_list for rho in self.rho_list]


@dataclass(frozen=True)
class PowerCell:
    n: int
    rho: float
    power_matching: float
    power_pearson: float
    reps_used: int
    mc_stderr: float
    nominal_power: float | None = None


@dataclass(frozen=True)
class JointStats:
    n: int
    corr_m_rho: float
    corr_rho_tau: float
    std_slope_m_rho: float
    r_squared_m_rho: float
    sd_m: float
    sd_rho: float


@dataclass(frozen=True)
class DispersionRow:
    n: int
    sd_m: float
    sd_rho: float


class Bucket(str, Enum):
    M_LT_1 = "m_lt_1"
    M_EQ_1 = "m_eq_1"
    M_GT_1 = "m_gt_1"


@dataclass(frozen=True)
class IndicatorRow:
    n: int
    rho: float
    m_bucket: Bucket
    prob_overestimate: float
    bucket_count: int


# ---------------------------------------------------------------------------
# sampling


def bivariate_normal_sample(n: int, rho: float, stream: StreamLike = 0, rep: int = 0) -> BivariateSample:
    """One bivariate standard normal sample with correlation ``rho``.

    ``y = rho * x + sqrt(1 - rho^2) * z``; the draw is replication ``rep`` of
    ``stream``, identical to the one the experiments use for that replication.
    """
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [-1, 1], got {rho!r}")
    x, y = _draw(_as_stream(stream), n, rho, rep, rep + 1)
    return BivariateSample(x[0], y[0])


def _draw(stream: Stream, n: int, rho: float, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    z = stream.normals(start, stop, 2 * n)
    x = z[:, :n]
    y = rho * x + math.sqrt(1.0 - rho * rho) * z[:, n:]
    return x, y


@dataclass
class _Block:
    """Per-replication statistics for replications ``[start, stop)`` of a cell."""

    m: np.ndarray
    rho_s: np.ndarray
    r: np.ndarray
    tau: np.ndarray | None = field(default=None)


def _rank_rows(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(a, axis=1, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(1, a.shape[1] + 1)[None, :], axis=1)
    tied = (np.diff(np.take_along_axis(a, order, axis=1), axis=1) == 0).any(axis=1)
    return ranks, tied


def _simulate(stream: Stream, n: int, rho: float, start: int, stop: int, with_tau: bool = False) -> _Block:
    x, y = _draw(stream, n, rho, start, stop)
    rx, tx = _rank_rows(x)
    ry, ty = _rank_rows(y)
    for i in np.flatnonzero(tx | ty):
        # rare with 53-bit normals; break ties from the replication's own substream
        rs = BivariateSample(x[i], y[i]).rank("random", stream.replication_rng(start + int(i)))
        rx[i], ry[i] = rs.rx, rs.ry

    m = np.count_nonzero(rx == ry, axis=1)
    d = rx - ry
    rho_s = 1.0 - 6.0 * np.einsum("ij,ij->i", d, d) / (n * (n * n - 1))

    dx = x - x.mean(axis=1, keepdims=True)
    dy = y - y.mean(axis=1, keepdims=True)
    sxy = np.einsum("ij,ij->i", dx, dy)
    sxx = np.einsum("ij,ij->i", dx, dx)
    syy = np.einsum("ij,ij->i", dy, dy)
    r = np.clip(sxy / np.sqrt(sxx * syy), -1.0, 1.0)

    tau = None
    if with_tau:
        iu, ju = np.triu_indices(n, k=1)
        s = np.sign(rx[:, ju] - rx[:, iu]) * np.sign(ry[:, ju] - ry[:, iu])
        tau = s.sum(axis=1) / math.comb(n, 2)
    return _Block(m=m, rho_s=rho_s, r=r, tau=tau)


def _chunked(reps: int, fn: Callable[[int, int], T], workers: int | None) -> list[T]:
    bounds = [(s, min(s + CHUNK_REPS, reps)) for s in range(0, reps, CHUNK_REPS)]
    if not workers or workers <= 1 or len(bounds) == 1:
        return [fn(a, b) for a, b in bounds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map preserves submission order, so merging stays deterministic
        return list(pool.map(lambda ab: fn(*ab), bounds))


def _collect(stream: Stream, n: int, rho: float, reps: int, workers: int | None, with_tau: bool = False) -> _Block:
    blocks = _chunked(reps, lambda a, b: _simulate(stream, n, rho, a, b, with_tau), workers)
    return _Block(
        m=np.concatenate([b.m for b in blocks]),
        rho_s=np.concatenate([b.rho_s for b in blocks]),
        r=np.concatenate([b.r for b in blocks]),
        tau=np.concatenate([b.tau for b in blocks]) if with_tau else None,
    )


# ---------------------------------------------------------------------------
# power


def matching_rejection_threshold(n: int, rule: RejectionRule, alpha: float) -> int | None:
    """Smallest m that rejects under ``rule``; ``None`` if nothing rejects."""
    if rule == "fixed_m_ge_4":
        return 4
    if rule == "exact_alpha":
        try:
            return critical_m(n, alpha, "exact").k
        except NoRejectionRegion:
            return None
    raise ValueError(f"unknown rejection rule {rule!r}")


def _power_cell(
    stream: Stream,
    n: int,
    rho: float,
    reps: int,
    alpha: float,
    rule: RejectionRule,
    workers: int | None,
    nominal: float | None = None,
) -> PowerCell:
    threshold = matching_rejection_threshold(n, rule, alpha)

    def count(a: int, b: int) -> tuple[int, int]:
        blk = _simulate(stream, n, rho, a, b)
        hits_m = 0 if threshold is None else int(np.count_nonzero(blk.m >= threshold))
        hits_r = int(np.count_nonzero(pearson_p_value(blk.r, n) <= alpha))
        return hits_m, hits_r

    counts = _chunked(reps, count, workers)
    p_m = sum(c[0] for c in counts) / reps
    p_r = sum(c[1] for c in counts) / reps
    return PowerCell(
        n=n,
        rho=rho,
        power_matching=p_m,
        power_pearson=p_r,
        reps_used=reps,
        mc_stderr=math.sqrt(p_m * (1.0 - p_m) / reps),
        nominal_power=nominal,
    )


def power_experiment(config: ExperimentConfig, workers: int | None = None) -> list[PowerCell]:
    """Rejection rates of both tests at every ``(n, rho)`` cell of ``config``."""
    root = Stream(config.master_seed)
    return [
        _power_cell(root.cell(i), n, rho, config.reps, config.alpha, config.rejection_rule, workers)
        for i, (n, rho) in enumerate(config.cells())
    ]


def relative_power_experiment(config: ExperimentConfig, workers: int | None = None) -> list[PowerCell]:
    """Matching-test power at the correlations where the t-test has 50-80% power.

    ``config.n_list`` selects sample sizes from :data:`RELATIVE_POWER_GRID`;
    ``config.rho_list`` is ignored because the correlations depend on n.
    """
    unknown = [n for n in config.n_list if n not in RELATIVE_POWER_GRID]
    if unknown:
        raise ValueError(f"no relative-power correlations for n in {unknown}; choose from {sorted(RELATIVE_POWER_GRID)}")
    cells = [(n, rho, nominal) for n in config.n_list for nominal, rho in RELATIVE_POWER_GRID[n]]
    root = Stream(config.master_seed)
    return [
        _power_cell(root.cell(i), n, rho, config.reps, config.alpha, config.rejection_rule, workers, nominal)
        for i, (n, rho, nominal) in enumerate(cells)
    ]


# ---------------------------------------------------------------------------
# null-distribution experiments


def joint_distribution_experiment(
    n: int, reps: int = 100_000, stream: StreamLike = 0, workers: int | None = None
) -> JointStats:
    """Correlations among m, Spearman's rho and Kendall's tau under independence.

    ``std_slope_m_rho`` is the least-squares slope of z-scored rho on z-scored
    m and ``r_squared_m_rho`` the coefficient of determination of that fit;
    both are computed from the fit rather than from the correlation.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    blk = _collect(_as_stream(stream), n, 0.0, reps, workers, with_tau=True)
    m = blk.m.astype(float)
    rho_s = blk.rho_s

    zm = (m - m.mean()) / m.std()
    zr = (rho_s - rho_s.mean()) / rho_s.std()
    slope = float(np.dot(zm, zr) / np.dot(zm, zm))
    resid = zr - slope * zm
    r_squared = 1.0 - float(np.dot(resid, resid) / np.dot(zr, zr))

    return JointStats(
        n=n,
        corr_m_rho=_corr(m, rho_s),
        corr_rho_tau=_corr(rho_s, blk.tau),
        std_slope_m_rho=slope,
        r_squared_m_rho=r_squared,
        sd_m=float(m.std(ddof=1)),
        sd_rho=float(rho_s.std(ddof=1)),
    )


def dispersion_experiment(
    n_list: Sequence[int], reps: int = 100_000, stream: StreamLike = 0, workers: int | None = None
) -> list[DispersionRow]:
    """Null standard deviations of m and Spearman's rho for each n.

    The i-th size uses cell ``stream.cell_index + i``.
    """
    root = _as_stream(stream)
    rows = []
    for i, n in enumerate(n_list):
        blk = _collect(root.cell(root.cell_index + i), int(n), 0.0, reps, workers)
        rows.append(DispersionRow(n=int(n), sd_m=float(blk.m.std(ddof=1)), sd_rho=float(blk.rho_s.std(ddof=1))))
    return rows


# ---------------------------------------------------------------------------
# sampling-error sign


def error_sign_experiment(
    n: int,
    rho_list: Iterable[float] = DEFAULT_RHO_GRID,
    reps: int = 100_000,
    stream: StreamLike = 0,
    workers: int | None = None,
) -> list[IndicatorRow]:
    """Estimate P(r > rho | bucket of m) for m = 0, m = 1 and m >= 2.

    ``r`` is Pearson's correlation of the raw sample and ``m`` the matching
    statistic of its ranks.  Empty buckets report ``nan``.  The i-th
    correlation uses cell ``stream.cell_index + i``.
    """
    if n < 4:
        raise ValueError("n must be at least 4")
    root = _as_stream(stream)
    rows = []
    for i, rho in enumerate(rho_list):
        rho = float(rho)
        if not abs(rho) < 1.0:
            raise ValueError("every rho must satisfy |rho| < 1")
        blk = _collect(root.cell(root.cell_index + i), n, rho, reps, workers)
        over = blk.r > rho
        masks = {
            Bucket.M_LT_1: blk.m < 1,
            Bucket.M_EQ_1: blk.m == 1,
            Bucket.M_GT_1: blk.m > 1,
        }
        for bucket, mask in masks.items():
            k = int(np.count_nonzero(mask))
            prob = int(np.count_nonzero(over & mask)) / k if k else math.nan
            rows.append(IndicatorRow(n=n, rho=rho, m_bucket=bucket, prob_overestimate=prob, bucket_count=k))
    return rows


def _corr(a: np.ndarray, b: np.ndarray) -> float:
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.dot(da, da)) * float(np.dot(db, db)))
    if denom == 0.0:
        return math.nan
    return max(-1.0, min(1.0, float(np.dot(da, db)) / denom))


def _as_stream(stream: StreamLike) -> Stream:
    return stream if isinstance(stream, Stream) else Stream(int(stream))
