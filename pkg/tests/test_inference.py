import math
import warnings

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from matchstat.combinatorics import match_tail
from matchstat.errors import DegenerateR, NoRejectionRegion, SampleTooSmall
from matchstat.inference import (
    critical_m,
    matching_p_value,
    matching_test,
    pearson_p_value,
    pearson_test,
    t_two_sided_p,
)
from matchstat.montecarlo import ExperimentConfig, power_experiment
from matchstat.rank_stats import BivariateSample, RankedSample


def ranked_with_m(n, m):
    """Ranks agreeing in the first m positions and deranged (cyclic shift) elsewhere."""
    rx = np.arange(1, n + 1)
    ry = rx.copy()
    rest = ry[m:]
    if rest.size:
        ry[m:] = np.roll(rest, 1)
    return RankedSample(rx, ry)


def t_p_oracle(t, df):
    """Two-sided p by quadrature of the Student-t density."""
    mp.mp.dps = 40
    c = mp.gamma((df + 1) / mp.mpf(2)) / (mp.sqrt(df * mp.pi) * mp.gamma(df / mp.mpf(2)))
    dens = lambda u: c * (1 + u * u / df) ** (-(df + 1) / mp.mpf(2))
    return float(2 * mp.quad(dens, [abs(mp.mpf(t)), mp.inf]))


class TestMatchingTest:
    def test_worked_example_exact(self):
        res = matching_test(ranked_with_m(4, 4), "exact", 0.05)
        assert res.statistic == 4
        assert res.p_value == pytest.approx(0.0417, abs=5e-5)
        assert res.reject and res.mode == "exact" and res.n == 4

    def test_worked_example_asymptotic(self):
        res = matching_test(ranked_with_m(4, 4), "asymptotic", 0.05)
        assert res.p_value == pytest.approx(0.018988156876153809, rel=1e-12)
        assert res.reject

    def test_no_matches(self):
        res = matching_test(ranked_with_m(10, 0), "exact", 0.05)
        assert res.statistic == 0
        assert res.p_value == 1.0 and not res.reject

    def test_too_small(self):
        with pytest.raises(SampleTooSmall):
            matching_test(ranked_with_m(3, 3))

    def test_bad_mode_and_alpha(self):
        with pytest.raises(ValueError):
            matching_test(ranked_with_m(5, 1), "poisson")
        with pytest.raises(ValueError):
            matching_test(ranked_with_m(5, 1), alpha=1.5)

    @pytest.mark.parametrize("alpha", [0.01, 0.0417, 0.05, 0.2])
    def test_reject_iff_p_le_alpha(self, alpha):
        for n in (4, 8, 25):
            for m in range(n + 1):
                if m == n - 1:
                    continue
                res = matching_test(ranked_with_m(n, m), "exact", alpha)
                assert res.reject == (res.p_value <= alpha)
                assert 0.0 <= res.p_value <= 1.0

    @pytest.mark.parametrize("mode", ["exact", "asymptotic"])
    @pytest.mark.parametrize("n", [4, 7, 12, 30, 150])
    def test_monotone_in_m(self, mode, n):
        ps = [matching_p_value(n, m, mode) for m in range(n + 1)]
        assert all(a >= b for a, b in zip(ps, ps[1:]))

    @pytest.mark.parametrize("n", list(range(7, 25)) + [40, 100])
    def test_exact_and_asymptotic_agree(self, n):
        for m in range(n + 1):
            assert abs(matching_p_value(n, m, "exact") - matching_p_value(n, m, "asymptotic")) < 0.005


class TestCriticalM:
    def test_examples(self):
        k, size = critical_m(4, 0.05, "exact")
        assert k == 3 and size == pytest.approx(1 / 24)
        k, size = critical_m(100, 0.05, "asymptotic")
        assert k == 4 and size == pytest.approx(0.018988156876153809, rel=1e-12)

    def test_no_rejection_region(self):
        # smallest nonzero exact tail at n = 4 is 1/24
        with pytest.raises(NoRejectionRegion):
            critical_m(4, 0.001, "exact")

    @given(st.integers(4, 60), st.floats(1e-6, 0.5), st.sampled_from(["exact", "asymptotic"]))
    def test_is_smallest(self, n, alpha, mode):
        try:
            k, size = critical_m(n, alpha, mode)
        except NoRejectionRegion:
            assert matching_p_value(n, n, mode) > alpha
            return
        assert size == matching_p_value(n, k, mode) <= alpha
        assert matching_p_value(n, k - 1, mode) > alpha


class TestStudentT:
    @pytest.mark.parametrize(
        "t, df, expected",
        [
            (0.5, 3, 0.65144796484815099444),
            (2.0, 10, 0.073388034770740365618),
            (-3.7, 25, 0.001065910494874309516),
            (10.0, 98, 1.2102537526622186992e-16),
            (1.96, 1000, 0.050273184955748718435),
        ],
    )
    def test_frozen_quadrature_values(self, t, df, expected):
        assert t_two_sided_p(t, df) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("df", [1, 2, 5, 17, 60])
    @pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 2.5, 6.0])
    def test_against_quadrature(self, t, df):
        assert t_two_sided_p(t, df) == pytest.approx(t_p_oracle(t, df), rel=1e-10, abs=1e-300)

    def test_vectorised_and_infinite(self):
        p = t_two_sided_p(np.array([0.0, np.inf, -np.inf]), 8)
        assert p.tolist() == [1.0, 0.0, 0.0]


class TestPearsonTest:
    def test_headline_case(self):
        r, n = 0.277, 100
        t = r * math.sqrt((n - 2) / (1 - r * r))
        assert t == pytest.approx(2.853830726780693, rel=1e-12)
        assert pearson_p_value(r, n) == pytest.approx(0.005270994866647261, rel=1e-10)
        assert pearson_p_value(r, n) == pytest.approx(t_p_oracle(t, n - 2), rel=1e-10)

    def test_perfect_line(self):
        with pytest.warns(DegenerateR):
            res = pearson_test(BivariateSample([1, 2, 3, 4, 5], [3, 5, 7, 9, 11]))
        assert res.p_value == 0.0 and res.reject and res.mode == "t_test"

    def test_zero_correlation(self):
        # symmetric design with r = 0 exactly
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            res = pearson_test(BivariateSample([1, 2, 3, 4], [1, -1, -1, 1]))
        assert res.statistic == 0.0
        assert res.p_value == 1.0 and not res.reject

    def test_too_small(self):
        with pytest.raises(SampleTooSmall):
            pearson_test(BivariateSample([1, 2, 3], [1, 3, 2]))

    def test_vectorised(self):
        r = np.array([-0.5, 0.0, 0.277, 1.0])
        p = pearson_p_value(r, 100)
        assert p[1] == 1.0 and p[3] == 0.0
        assert p[2] == pytest.approx(pearson_p_value(0.277, 100))


@pytest.mark.slow
@pytest.mark.parametrize("n", [10, 50])
def test_exact_mode_size_under_null(n):
    reps = 100_000
    crit = critical_m(n, 0.05, "exact")
    cell = power_experiment(
        ExperimentConfig((n,), (0.0,), reps=reps, master_seed=2024, rejection_rule="exact_alpha")
    )[0]
    expected = match_tail(n, crit.k)
    assert expected == crit.size
    se = math.sqrt(expected * (1 - expected) / reps)
    assert abs(cell.power_matching - expected) <= 3 * se


@pytest.mark.slow
def test_pearson_size_under_null():
    cell = power_experiment(ExperimentConfig((100,), (0.0,), reps=100_000, master_seed=77))[0]
    assert abs(cell.power_pearson - 0.05) <= 0.005
