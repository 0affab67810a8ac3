"""Diagnostics for whether the estimate at ``k = n_y`` has settled.

Neither diagnostic returns a verdict. Both report raw numbers and leave the
call to the user.

* discrete derivative: ``theta_hat(n_y) - theta_hat(n_y - 1)``. A large
  magnitude means the curve is still falling at the end of the y-sample.
* decay-rate regression: if ``theta(k) - theta(inf)`` decays like ``rho**k``,
  then ``log(theta(k-1) - theta(k))`` is linear in k with slope ``ln(rho)``,
  and ``rho_hat**n_y`` bounds the remaining gap.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DomainError
from .estimator import DissimilaritySeries


@dataclass
class RegressionReport:
    slope: float
    intercept: float
    rho_hat: float
    rho_hat_pow_ny: float
    max_abs_residual: float
    window: tuple
    points_used: int
    points_dropped: int
    degenerate: bool

    def to_dict(self):
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def discrete_derivative(series: DissimilaritySeries):
    """``theta_hat(k) - theta_hat(k - 1)`` for ``k = 2..n_y`` (all entries <= 0)."""
    if series.n_y < 2:
        raise DomainError("the discrete derivative needs n_y >= 2")
    return np.diff(series.theta)


def derivative_at_ny(series: DissimilaritySeries):
    """The heuristic statistic ``|theta_hat(n_y) - theta_hat(n_y - 1)|``."""
    return float(abs(discrete_derivative(series)[-1]))


def default_window(n_y):
    """``(max(2, floor(0.6 n_y)), n_y)``, clipped into a valid window."""
    if n_y < 2:
        raise DomainError("the regression needs n_y >= 2")
    return min(max(2, int(math.floor(0.6 * n_y))), n_y), n_y


def rho_regression(series: DissimilaritySeries, k_lo=None, k_hi=None):
    """Least-squares fit of ``ln(theta_hat(k-1) - theta_hat(k))`` against k.

    Only strictly positive differences in ``k_lo..k_hi`` enter the fit. With
    fewer than two usable points the report is degenerate: ``rho_hat = 0`` and
    zero residual.
    """
    n_y = series.n_y
    lo_default, hi_default = default_window(n_y)
    k_lo = lo_default if k_lo is None else int(k_lo)
    k_hi = hi_default if k_hi is None else int(k_hi)
    if not 2 <= k_lo <= k_hi <= n_y:
        raise DomainError(f"invalid regression window [{k_lo}, {k_hi}] for n_y={n_y}")

    ks = np.arange(k_lo, k_hi + 1)
    diffs = series.theta[ks - 2] - series.theta[ks - 1]
    keep = diffs > 0
    used = int(keep.sum())
    dropped = int(ks.size - used)
    if used < 2:
        return RegressionReport(
            slope=0.0, intercept=0.0, rho_hat=0.0, rho_hat_pow_ny=0.0,
            max_abs_residual=0.0, window=(k_lo, k_hi), points_used=used,
            points_dropped=dropped, degenerate=True,
        )
    kk = ks[keep].astype(np.float64)
    yy = np.log(diffs[keep])
    # center k before fitting; raw k near 10^4 makes the normal equations ill-conditioned
    k_mean = kk.mean()
    kc = kk - k_mean
    slope = float(np.dot(kc, yy - yy.mean()) / np.dot(kc, kc))
    intercept = float(yy.mean() - slope * k_mean)
    resid = yy - (intercept + slope * kk)
    rho = min(max(math.exp(slope), 0.0), 1.0)
    return RegressionReport(
        slope=slope,
        intercept=intercept,
        rho_hat=rho,
        rho_hat_pow_ny=rho**n_y,
        max_abs_residual=float(np.max(np.abs(resid))),
        window=(k_lo, k_hi),
        points_used=used,
        points_dropped=dropped,
        degenerate=False,
    )
