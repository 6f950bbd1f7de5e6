"""Ranking of bivariate samples and the four sample statistics built on them.

Ranks run from 1 (smallest) to n.  Both rank vectors of a
:class:`RankedSample` are permutations of ``1..n``; ties must be resolved
before a sample is ranked, either by refusing them (``"reject"``) or by
breaking them uniformly at random (``"random"``).  Midranks are deliberately
not offered because they change what counts as a match.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence, Union

import numpy as np

from .errors import DataError, TiesPresent, ZeroVariance

__all__ = [
    "BivariateSample",
    "RankedSample",
    "TiePolicy",
    "kendall_tau",
    "matching_statistic",
    "pearson_r",
    "rank_transform",
    "spearman_rho",
]

TiePolicy = Literal["reject", "random"]
SeedLike = Union[None, int, Sequence[int], np.random.Generator]


@dataclass(frozen=True, eq=False)
class BivariateSample:
    """Paired observations ``(x[i], y[i])``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or y.ndim != 1:
            raise DataError("x and y must be one-dimensional")
        if x.shape != y.shape:
            raise DataError(f"x and y differ in length ({x.size} != {y.size})")
        if x.size < 2:
            raise DataError(f"need at least 2 paired observations, got {x.size}")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise DataError("sample contains non-finite values")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return int(self.x.size)

    def rank(self, tie_policy: TiePolicy = "reject", seed: SeedLike = None) -> RankedSample:
        """Rank both variables with the same tie policy.

        Under ``"random"`` one generator built from ``seed`` breaks ties in
        ``x`` first and then in ``y``.
        """
        rng = _generator(seed) if tie_policy == "random" else None
        rx = rank_transform(self.x, tie_policy, rng)
        ry = rank_transform(self.y, tie_policy, rng)
        return RankedSample(rx, ry)


@dataclass(frozen=True, eq=False)
class RankedSample:
    """Two rank vectors, each a permutation of ``1..n``."""

    rx: np.ndarray
    ry: np.ndarray
    n: int = field(init=False)

    def __post_init__(self) -> None:
        rx = np.asarray(self.rx)
        ry = np.asarray(self.ry)
        if rx.ndim != 1 or rx.shape != ry.shape:
            raise DataError("rank vectors must be one-dimensional and of equal length")
        n = rx.size
        if n < 2:
            raise DataError(f"need at least 2 ranked pairs, got {n}")
        expected = np.arange(1, n + 1)
        for name, r in (("rx", rx), ("ry", ry)):
            if not np.issubdtype(r.dtype, np.integer) and not np.array_equal(r, np.round(r)):
                raise DataError(f"{name} must contain integer ranks")
            if not np.array_equal(np.sort(r), expected):
                raise DataError(f"{name} is not a permutation of 1..{n}")
        object.__setattr__(self, "rx", rx.astype(np.int64))
        object.__setattr__(self, "ry", ry.astype(np.int64))
        object.__setattr__(self, "n", int(n))


def rank_transform(values, tie_policy: TiePolicy = "reject", seed: SeedLike = None) -> np.ndarray:
    """Return ranks 1..n of ``values`` (1 = smallest).

    Parameters
    ----------
    values : array_like
        At least two finite reals.
    tie_policy : {"reject", "random"}
        ``"reject"`` raises :class:`TiesPresent` on any tie.  ``"random"``
        gives tied values distinct consecutive ranks in a uniformly random
        order drawn from ``seed`` (an int, a seed sequence or a
        ``numpy.random.Generator``).
    """
    a = np.asarray(values, dtype=float)
    if a.ndim != 1:
        raise DataError("values must be one-dimensional")
    if a.size < 2:
        raise DataError(f"need at least 2 values to rank, got {a.size}")
    if not np.isfinite(a).all():
        raise DataError("values must be finite")

    if tie_policy == "reject":
        order = np.argsort(a, kind="stable")
        if np.any(np.diff(a[order]) == 0):
            raise TiesPresent(
                "tied values found; the matching statistic needs distinct ranks "
                "(use tie_policy='random' to break ties at random)"
            )
    elif tie_policy == "random":
        keys = _generator(seed).random(a.size)
        # primary key last: sort by value, then by the random key within ties
        order = np.lexsort((keys, a))
    else:
        raise ValueError(f"unknown tie_policy {tie_policy!r}")

    ranks = np.empty(a.size, dtype=np.int64)
    ranks[order] = np.arange(1, a.size + 1)
    return ranks


def matching_statistic(rs: RankedSample) -> int:
    """Number of pairs whose two ranks are equal."""
    return int(np.count_nonzero(rs.rx == rs.ry))


def spearman_rho(rs: RankedSample) -> float:
    n = rs.n
    d = rs.rx - rs.ry
    return 1.0 - 6.0 * float(np.dot(d, d)) / (n * (n * n - 1))


def kendall_tau(rs: RankedSample) -> float:
    """Tau-a: (concordant - discordant) / C(n, 2).  Ranks never tie, so no correction applies."""
    i, j = np.triu_indices(rs.n, k=1)
    s = np.sign(rs.rx[j] - rs.rx[i]) * np.sign(rs.ry[j] - rs.ry[i])
    return float(s.sum()) / math.comb(rs.n, 2)


def pearson_r(s: BivariateSample) -> float:
    """Product-moment correlation, clamped to [-1, 1].

    Raises :class:`ZeroVariance` if either variable is constant.
    """
    dx = s.x - s.x.mean()
    dy = s.y - s.y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("correlation is undefined when a variable is constant")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def _generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
