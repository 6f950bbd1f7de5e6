"""Exception types raised across the package."""


class MatchstatError(Exception):
    """Base class for all package errors."""


class DataError(MatchstatError, ValueError):
    """Input data cannot be used for the requested computation."""


class TiesPresent(DataError):
    """Tied values found while ranking under the ``reject`` tie policy.

    The matching statistic is undefined for tied ranks unless a tie-breaking
    convention is chosen, so ranking refuses to guess.
    """


class ZeroVariance(DataError):
    """A variable is constant, so its correlation is undefined."""


class SampleTooSmall(DataError):
    """The sample is smaller than the minimum the procedure supports."""


class NoRejectionRegion(MatchstatError, ValueError):
    """No attainable value of the statistic has tail probability <= alpha."""


class DegenerateR(RuntimeWarning):
    """|r| == 1: the t statistic is infinite and the p-value is reported as 0."""
