"""Estimate how much of one discrete distribution is unseen in samples of another.

Typical use::

    from urnoverlap import Sample, estimate

    series = estimate(Sample({1: 3, 2: 1}), Sample({1: 5, 3: 2}))
    series.theta, series.stderr
"""

from .errors import (
    DomainError,
    GuardError,
    InvalidInputError,
    ParseError,
    UndefinedVarianceError,
    UrnOverlapError,
)
from .estimator import DissimilaritySeries, LogFactorialTable, binom_ratio, theta_hat, theta_hat_all
from .heuristics import RegressionReport, derivative_at_ny, discrete_derivative, rho_regression
from .summaries import PairedSummary, Sample, summarize_pair
from .variance import (
    VarianceSeries,
    c_coeff,
    jackknife_total,
    jackknife_x,
    jackknife_y,
    stderr_at_ny,
    theta_hat_y,
)

__version__ = "0.1.0"


def estimate(x, y):
    """Estimates and jackknife variances for every k, as one filled-in series."""
    s = summarize_pair(x, y)
    series = theta_hat_all(s)
    if s.n_x >= 2:
        jackknife_total(s, series)
    return series


__all__ = [
    "DissimilaritySeries",
    "DomainError",
    "GuardError",
    "InvalidInputError",
    "LogFactorialTable",
    "PairedSummary",
    "ParseError",
    "RegressionReport",
    "Sample",
    "UndefinedVarianceError",
    "UrnOverlapError",
    "VarianceSeries",
    "binom_ratio",
    "c_coeff",
    "derivative_at_ny",
    "discrete_derivative",
    "estimate",
    "jackknife_total",
    "jackknife_x",
    "jackknife_y",
    "rho_regression",
    "stderr_at_ny",
    "summarize_pair",
    "theta_hat",
    "theta_hat_all",
    "theta_hat_y",
]
