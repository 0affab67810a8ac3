"""Delete-1 jackknife variance of the dissimilarity estimator.

``S2(k) = S2_x(k) + S2_y(k)``: the first term comes from deleting single
x-draws, the second from deleting single y-draws. The closed forms below are
written over ``Q`` and ``M`` and agree exactly with recomputing the estimator
on every leave-one-out sample (see :mod:`urnoverlap.oracle`).

Two summation ranges differ from the textbook-style formulas some readers
may know:

* ``S2_x`` sums over *all* j with ``Q(j) > 0``. Terms with ``j > n_y - k``
  have a zero binomial ratio but a nonzero deviation ``(0 - theta_hat)**2``.
* ``S2_y`` includes the ``i = 0`` rows of ``M`` (colors seen only in y).

``literal=True`` reproduces the truncated ranges for comparison only.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UndefinedVarianceError
from .estimator import DissimilaritySeries, _check_int, binom_ratio, ratio_table
from .summaries import PairedSummary


@dataclass
class VarianceSeries:
    """Per-k jackknife components; index ``k - 1`` holds the value at k."""

    var_x: np.ndarray
    var_y: np.ndarray
    var_total: np.ndarray
    stderr: np.ndarray


def _require_nx(s):
    if s.n_x < 2:
        raise UndefinedVarianceError(f"the x-jackknife needs n_x >= 2, got n_x={s.n_x}")


def _check_k(s, k, hi):
    k = _check_int("k", k)
    if not 1 <= k <= hi:
        raise DomainError(f"k={k} outside 1..{hi}")
    return k


def jackknife_x(s: PairedSummary, k, th, literal=False):
    """x-side jackknife ``S2_x(k)``; ``th`` is the estimate at the same k."""
    _require_nx(s)
    k = _check_k(s, k, s.n_y)
    js, vals = s.q_support
    terms = []
    for j, q in zip(js, vals):
        if literal and j > s.n_y - k:
            continue
        terms.append(q * (binom_ratio(s.n_y, int(j), k) - th) ** 2)
    return math.fsum(terms) / (s.n_x * (s.n_x - 1))


def c_coeff(s: PairedSummary, j, k):
    """``C(n_y - j - 1, k) / (n_x * C(n_y - 1, k))`` for ``1 <= k <= n_y - 1``."""
    k = _check_k(s, k, s.n_y - 1)
    j = _check_int("j", j, 0)
    if j > s.n_y - 1 - k:
        return 0.0
    return binom_ratio(s.n_y - 1, j, k) / s.n_x


def theta_hat_y(s: PairedSummary, k):
    """``sum_j c_j(k) Q(j)``: the estimate at k with ``n_y - 1`` y-draws and Q unchanged."""
    k = _check_k(s, k, s.n_y - 1)
    js, vals = s.q_support
    return math.fsum(q * c_coeff(s, int(j), k) for j, q in zip(js, vals))


def jackknife_y(s: PairedSummary, k, th, literal=False):
    """y-side jackknife ``S2_y(k)``; zero by definition at ``k = n_y``."""
    k = _check_k(s, k, s.n_y)
    if k == s.n_y:
        return 0.0
    b = theta_hat_y(s, k) - th
    terms = []
    for (i, j), cnt in s.m.items():
        if j < 1:
            continue
        if literal and (i < 1 or j > s.n_y - k):
            continue
        a = c_coeff(s, j - 1, k) - c_coeff(s, j, k)
        terms.append(j * cnt * (i * a + b) ** 2)
    return (s.n_y - 1) / s.n_y * math.fsum(terms)


def jackknife_total(s: PairedSummary, series: DissimilaritySeries):
    """All jackknife components for ``k = 1..n_y`` in O(n_y * D).

    Also stores them on ``series`` (``var_x``, ``var_y``, ``var_total``).
    """
    _require_nx(s)
    if (series.n_x, series.n_y) != (s.n_x, s.n_y):
        raise DomainError("series and summary describe different sample sizes")
    n_x, n_y = s.n_x, s.n_y
    th = series.theta
    js, vals = s.q_support

    tab = ratio_table(n_y, js, n_y)[:, 1:]
    var_x = np.zeros(n_y)
    for row, q in zip(tab, vals):
        var_x += q * (row - th) ** 2
    var_x /= n_x * (n_x - 1)

    var_y = np.zeros(n_y)
    if n_y > 1:
        groups = s.m_by_j
        needed = sorted(set(js.tolist()) | set(groups) | {j - 1 for j in groups})
        row_of = {j: r for r, j in enumerate(needed)}
        ctab = ratio_table(n_y - 1, needed, n_y - 1)[:, 1:] / n_x
        theta_y = np.zeros(n_y - 1)
        for j, q in zip(js, vals):
            theta_y += q * ctab[row_of[int(j)]]
        b = theta_y - th[:-1]
        acc = np.zeros(n_y - 1)
        for j, (iv, cv) in groups.items():
            a = ctab[row_of[j - 1]] - ctab[row_of[j]]
            dev = iv[:, None] * a[None, :] + b[None, :]
            acc += j * (cv[:, None] * dev**2).sum(axis=0)
        var_y[:-1] = (n_y - 1) / n_y * acc

    var_total = var_x + var_y
    series.var_x, series.var_y, series.var_total = var_x, var_y, var_total
    return VarianceSeries(var_x=var_x, var_y=var_y, var_total=var_total, stderr=np.sqrt(var_total))


def stderr_at_ny(theta_ny, n_x):
    """Jackknife standard error at ``k = n_y``: ``sqrt(theta (1 - theta) / (n_x - 1))``.

    At the full y-sample the y-side term vanishes and the x-side term reduces
    to a binomial-looking closed form.
    """
    n_x = np.asarray(n_x, dtype=np.float64)
    if np.min(n_x) < 2:
        raise UndefinedVarianceError(f"the x-jackknife needs n_x >= 2, got n_x={np.min(n_x):g}")
    theta_ny = np.asarray(theta_ny, dtype=np.float64)
    return np.sqrt(np.clip(theta_ny * (1.0 - theta_ny), 0.0, None) / (n_x - 1))


def batch_jackknife(x_counts, y_counts, n_x, n_y, ks, variance=True):
    """Estimator and jackknife for many sample pairs sharing ``(n_x, n_y)``.

    ``x_counts`` and ``y_counts`` are ``(R, C)`` integer arrays: replicate r
    drew color c ``x_counts[r, c]`` times from urn x and ``y_counts[r, c]``
    times from urn y. Works color by color instead of through Q and M, which
    lets the Monte Carlo harness vectorize over replicates.

    Returns ``(theta, var_x, var_y)``, each of shape ``(R, len(ks))``. With
    ``variance=False`` only theta is computed and the variances are NaN, which
    also allows ``n_x = 1``.
    """
    xc = np.asarray(x_counts, dtype=np.float64)
    yc = np.asarray(y_counts, dtype=np.int64)
    ks = np.asarray(ks, dtype=np.int64)
    if variance and n_x < 2:
        raise UndefinedVarianceError(f"the x-jackknife needs n_x >= 2, got n_x={n_x}")
    if ks.min() < 1 or ks.max() > n_y:
        raise DomainError(f"ks must lie in 1..{n_y}")
    r_tab = ratio_table(n_y, np.arange(n_y + 1), n_y)
    theta = np.empty((xc.shape[0], ks.size))
    var_x = np.empty_like(theta)
    var_y = np.zeros_like(theta)
    if not variance:
        var_x[:] = np.nan
        var_y[:] = np.nan
    c_tab = None
    if variance and n_y > 1:
        # row n_y + 1 is all zeros and stands in for c_{j-1} when j = 0
        c_tab = np.vstack([ratio_table(n_y - 1, np.arange(n_y + 1), n_y - 1), np.zeros(n_y)]) / n_x
    yc_minus = np.where(yc >= 1, yc - 1, n_y + 1)
    for col, k in enumerate(ks):
        r = r_tab[yc, k]
        th = (xc * r).sum(axis=1) / n_x
        theta[:, col] = th
        if not variance:
            continue
        var_x[:, col] = (xc * (r - th[:, None]) ** 2).sum(axis=1) / (n_x * (n_x - 1))
        if k < n_y:
            cj = c_tab[yc, k]
            th_y = (xc * cj).sum(axis=1)
            a = c_tab[yc_minus, k] - cj
            dev = xc * a + (th_y - th)[:, None]
            var_y[:, col] = (n_y - 1) / n_y * (yc * dev**2).sum(axis=1)
    return theta, var_x, var_y
