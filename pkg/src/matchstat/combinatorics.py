"""Exact and limiting distributions of the number of fixed points of a random permutation.

For two independent uniformly random permutations of ``n`` items, the number of
positions on which they agree has the rencontres distribution

    P(m = k) = C(n, k) * D(n - k) / n!

where ``D(t)`` counts derangements of ``t`` items.  As ``n`` grows the
distribution converges to Poisson(1) very quickly.

Counts are exact Python integers.  Probabilities are returned as floats; up to
``EXACT_MAX_N`` they are obtained by rounding the exact rational, beyond it the
truncated alternating series is summed in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

__all__ = [
    "EXACT_MAX_N",
    "MatchDistribution",
    "PoissonModel",
    "derangement_count",
    "match_count",
    "match_distribution",
    "match_pmf",
    "match_tail",
    "poisson_pmf",
    "poisson_tail",
]

EXACT_MAX_N = 20

# 1/j! < 1e-32 for j >= 30; terms past this offset cannot move a float sum.
_SERIES_DEPTH = 40


@lru_cache(maxsize=None)
def _derangements_upto(t: int) -> tuple[int, ...]:
    values = [1, 0]
    for i in range(2, t + 1):
        values.append((i - 1) * (values[i - 1] + values[i - 2]))
    return tuple(values[: t + 1])


def derangement_count(t: int) -> int:
    """Number of permutations of ``t`` items with no fixed point.

    Uses ``D(t) = (t - 1) * (D(t - 1) + D(t - 2))`` with ``D(0) = 1`` and
    ``D(1) = 0``.
    """
    t = _as_count(t, "t")
    # grow the cache in steps so repeated large calls stay cheap
    bound = max(32, 1 << max(t, 1).bit_length())
    return _derangements_upto(bound)[t]


def match_count(n: int, k: int) -> int:
    """Number of permutations of ``n`` items with exactly ``k`` fixed points."""
    n = _as_size(n)
    if k < 0 or k > n:
        return 0
    return math.comb(n, k) * derangement_count(n - k)


@dataclass(frozen=True)
class MatchDistribution:
    """Exact distribution of the matching statistic for a set of size ``n``.

    ``counts[k]`` is the number of permutations with exactly ``k`` fixed
    points and ``total`` is ``n!``.
    """

    n: int
    counts: tuple[int, ...]
    total: int

    def __post_init__(self) -> None:
        if len(self.counts) != self.n + 1:
            raise ValueError("counts must have length n + 1")
        if sum(self.counts) != self.total:
            raise ValueError("counts must sum to n!")

    def probability(self, k: int) -> Fraction:
        """Exact P(m = k) as a rational."""
        if k < 0 or k > self.n:
            return Fraction(0)
        return Fraction(self.counts[k], self.total)

    def tail_probability(self, k: int) -> Fraction:
        """Exact P(m >= k) as a rational."""
        if k <= 0:
            return Fraction(1)
        if k > self.n:
            return Fraction(0)
        return Fraction(sum(self.counts[k:]), self.total)

    def pmf(self, k: int) -> float:
        return float(self.probability(k))

    def tail(self, k: int) -> float:
        return float(self.tail_probability(k))

    def mean(self) -> Fraction:
        return Fraction(sum(k * c for k, c in enumerate(self.counts)), self.total)

    def variance(self) -> Fraction:
        second = Fraction(sum(k * k * c for k, c in enumerate(self.counts)), self.total)
        return second - self.mean() ** 2


@lru_cache(maxsize=64)
def match_distribution(n: int) -> MatchDistribution:
    """Build the exact :class:`MatchDistribution` for ``n`` items."""
    n = _as_size(n)
    counts = tuple(match_count(n, k) for k in range(n + 1))
    return MatchDistribution(n=n, counts=counts, total=math.factorial(n))


def match_pmf(n: int, k: int) -> float:
    """P(m = k) for two random permutations of ``n`` items.

    Returns 0.0 for ``k`` outside ``[0, n]``.
    """
    n = _as_size(n)
    if k < 0 or k > n:
        return 0.0
    if n <= EXACT_MAX_N:
        return match_distribution(n).pmf(k)
    return _series_pmf(n, k)


def match_tail(n: int, k: int) -> float:
    """P(m >= k): 1.0 for ``k <= 0`` and 0.0 for ``k > n``."""
    n = _as_size(n)
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if n <= EXACT_MAX_N:
        return match_distribution(n).tail(k)
    stop = min(n, k + _SERIES_DEPTH)
    return math.fsum(_series_pmf(n, j) for j in range(k, stop + 1))


def _series_pmf(n: int, k: int) -> float:
    # (1/k!) * sum_{j=0}^{n-k} (-1)^j / j!
    terms = []
    term = 1.0
    for j in range(n - k + 1):
        if j:
            term /= j
        if term == 0.0:
            break
        terms.append(-term if j % 2 else term)
    total = math.fsum(terms)
    if total <= 0.0:
        return 0.0
    return math.exp(math.log(total) - math.lgamma(k + 1))


@dataclass(frozen=True)
class PoissonModel:
    """Poisson distribution with rate ``lam`` (the limit law of the matching statistic is ``lam=1``)."""

    lam: float = 1.0

    def __post_init__(self) -> None:
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be positive and finite, got {self.lam!r}")

    def pmf(self, k: int) -> float:
        return poisson_pmf(self.lam, k)

    def tail(self, k: int) -> float:
        return poisson_tail(self.lam, k)

    def truncated_pmf(self, tol: float = 1e-16) -> list[float]:
        """pmf values for k = 0, 1, ... stopping once the remaining mass is below ``tol``."""
        values = []
        k = 0
        while True:
            values.append(self.pmf(k))
            if k > self.lam and self.tail(k + 1) < tol:
                return values
            k += 1


def poisson_pmf(lam: float, k: int) -> float:
    """e^-lam * lam^k / k!, evaluated in log space."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if k < 0:
        return 0.0
    return math.exp(-lam + k * math.log(lam) - math.lgamma(k + 1))


def poisson_tail(lam: float, k: int) -> float:
    """P(X >= k) for X ~ Poisson(lam); 1.0 at ``k <= 0``."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if k <= 0:
        return 1.0
    if k <= lam:
        return max(0.0, 1.0 - math.fsum(poisson_pmf(lam, j) for j in range(k)))
    # upper terms shrink at least geometrically once j > lam; sum them directly
    terms = []
    j = k
    while True:
        term = poisson_pmf(lam, j)
        terms.append(term)
        if term == 0.0 or term < 1e-18 * terms[0]:
            break
        j += 1
    return min(1.0, math.fsum(terms))


def _as_count(value: int, name: str) -> int:
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise ValueError(f"{name} must be a nonnegative integer, got {value!r}")
    return int(value)


def _as_size(n: int) -> int:
    n = _as_count(n, "n")
    if n < 1:
        raise ValueError("n must be at least 1")
    return n
