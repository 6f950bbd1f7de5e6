"""Exact and simulated behaviour of the matching statistic.

The matching statistic ``m`` counts the pairs of a bivariate sample whose two
ranks coincide.  This package provides its exact null distribution, the
matching-method test of independence, companion rank correlations, and a
reproducible Monte Carlo engine for power and sampling-error studies.
"""

from .combinatorics import (
    MatchDistribution,
    PoissonModel,
    derangement_count,
    match_count,
    match_distribution,
    match_pmf,
    match_tail,
    poisson_pmf,
    poisson_tail,
)
from .errors import (
    DataError,
    DegenerateR,
    MatchstatError,
    NoRejectionRegion,
    SampleTooSmall,
    TiesPresent,
    ZeroVariance,
)
from .inference import CriticalValue, TestResult, critical_m, matching_test, pearson_test
from .montecarlo import (
    ExperimentConfig,
    bivariate_normal_sample,
    dispersion_experiment,
    error_sign_experiment,
    joint_distribution_experiment,
    power_experiment,
    relative_power_experiment,
)
from .rank_stats import (
    BivariateSample,
    RankedSample,
    kendall_tau,
    matching_statistic,
    pearson_r,
    rank_transform,
    spearman_rho,
)
from .streams import Stream

__version__ = "0.1.0"
