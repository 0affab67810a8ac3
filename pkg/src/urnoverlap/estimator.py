"""Minimum-variance unbiased estimation of the average dissimilarity.

For a summary with sample sizes ``n_x``, ``n_y`` and Q-statistics ``Q``::

    theta_hat(k) = (1 / n_x) * sum_j Q(j) * C(n_y - j, k) / C(n_y, k),   k = 1..n_y

which equals the average of the kernel ``[[X_i not in {k-subset of Y}]]`` over
all x-draws and all k-subsets of the y-draws.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .summaries import PairedSummary

log = logging.getLogger(__name__)

CLAMP_WARN = 1e-9


class LogFactorialTable:
    """``values[n] = ln(n!)`` for ``n = 0..n_max``; grows on demand."""

    def __init__(self, n_max=1024):
        self.values = np.empty(0)
        self.extend(n_max)

    def extend(self, n_max):
        if n_max + 1 > self.values.size:
            self.values = gammaln(np.arange(n_max + 1, dtype=np.float64) + 1.0)
            self.values[:2] = 0.0
        return self

    @property
    def n_max(self):
        return self.values.size - 1

    def __getitem__(self, n):
        if np.max(n) > self.n_max:
            self.extend(int(np.max(n)))
        return self.values[n]

    def log_binom(self, n, k):
        return self[n] - self[k] - self[n - k]


_LOGFACT = LogFactorialTable()


def _check_int(name, value, lo=None):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise DomainError(f"{name} must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise DomainError(f"{name} must be >= {lo}, got {value}")
    return int(value)


def binom_ratio(n, j, k, method="logfact"):
    """``C(n - j, k) / C(n, k)``, the fraction of k-subsets avoiding j marked items.

    ``method="logfact"`` evaluates log-factorial differences in O(1);
    ``method="product"`` multiplies ``(n-k-t)/(n-t)`` for ``t < j`` in exact
    rational arithmetic and is meant for validation.
    """
    n = _check_int("n", n, 1)
    j = _check_int("j", j, 0)
    k = _check_int("k", k, 0)
    if k > n:
        raise DomainError(f"k={k} exceeds n={n}")
    if j > n - k:
        return 0.0
    if j == 0 or k == 0:
        return 1.0
    if method == "product":
        r = Fraction(1)
        for t in range(j):
            r *= Fraction(n - k - t, n - t)
        return float(r)
    if method != "logfact":
        raise ValueError(f"unknown method {method!r}")
    lf = _LOGFACT
    return math.exp((lf[n - j] - lf[n]) + (lf[n - k] - lf[n - j - k]))


def ratio_table(n, js, k_max):
    """Array ``R`` with ``R[a, k] = C(n - js[a], k) / C(n, k)`` for ``k = 0..k_max``.

    Built by the running product ``R[a, k+1] = R[a, k] * (n - j - k) / (n - k)``.
    Every factor lies in [0, 1], so each row is non-increasing in k exactly,
    in floating point, and reaches an exact zero once ``k > n - j``.
    """
    js = np.asarray(js, dtype=np.float64).reshape(-1, 1)
    if k_max > n:
        raise DomainError(f"k_max={k_max} exceeds n={n}")
    out = np.empty((js.shape[0], k_max + 1))
    out[:, 0] = np.where(js[:, 0] <= n, 1.0, 0.0)
    if k_max:
        t = np.arange(k_max, dtype=np.float64)
        factors = np.clip((n - js - t) / (n - t), 0.0, 1.0)
        np.cumprod(factors, axis=1, out=out[:, 1:])
        out[:, 1:] *= out[:, :1]
    return out


def _clamp(values, what):
    over = max(float(np.max(values, initial=0.0)) - 1.0, -float(np.min(values, initial=0.0)))
    if over > CLAMP_WARN:
        log.warning("%s left [0, 1] by %.3g before clamping", what, over)
    return np.clip(values, 0.0, 1.0)


@dataclass
class DissimilaritySeries:
    """``theta[k - 1]`` holds the estimate at k, for ``k = 1..n_y``.

    The variance fields are filled in by :func:`urnoverlap.variance.jackknife_total`
    (or :func:`urnoverlap.estimate`).
    """

    n_x: int
    n_y: int
    theta: np.ndarray
    var_x: Optional[np.ndarray] = None
    var_y: Optional[np.ndarray] = None
    var_total: Optional[np.ndarray] = None

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.shape != (self.n_y,):
            raise DomainError(f"theta has shape {self.theta.shape}, expected ({self.n_y},)")

    @property
    def ks(self):
        return np.arange(1, self.n_y + 1)

    def at(self, k):
        if not 1 <= k <= self.n_y:
            raise DomainError(f"k={k} outside 1..{self.n_y}")
        return float(self.theta[k - 1])

    @property
    def stderr(self):
        return None if self.var_total is None else np.sqrt(self.var_total)


def theta_hat(s: PairedSummary, k):
    """Estimate at a single ``k`` in ``1..n_y``."""
    k = _check_int("k", k)
    if not 1 <= k <= s.n_y:
        raise DomainError(f"k={k} outside 1..{s.n_y}")
    js, vals = s.q_support
    total = math.fsum(q * binom_ratio(s.n_y, int(j), k) for j, q in zip(js, vals))
    return float(_clamp(np.array([total / s.n_x]), "theta_hat")[0])


def theta_hat_all(s: PairedSummary):
    """All estimates ``k = 1..n_y`` in O(n_y * D), D = number of nonzero Q(j)."""
    js, vals = s.q_support
    tab = ratio_table(s.n_y, js, s.n_y)
    acc = np.zeros(s.n_y)
    # fixed accumulation order keeps the result monotone in k bit-for-bit
    for row, q in zip(tab[:, 1:], vals):
        acc += q * row
    theta = _clamp(acc / s.n_x, "theta_hat_all")
    return DissimilaritySeries(n_x=s.n_x, n_y=s.n_y, theta=theta)
