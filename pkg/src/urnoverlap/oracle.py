"""Ground truth for checking the estimators.

Two kinds of oracle live here:

* exact population quantities for a pair of known urns (``theta(k)``, the
  Hoeffding coefficients ``xi_{c,j}(k)``, the exact variance of the
  estimator, the variance of its projection), plus exhaustive enumeration
  of every dataset of a small size with its probability;
* brute-force versions of the estimator and of the leave-one-out jackknife
  that enumerate k-subsets of the y-draws directly and never touch Q, M or
  a binomial coefficient.
"""

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, combinations_with_replacement
from types import MappingProxyType

import numpy as np

from .errors import DomainError, GuardError, InvalidInputError, UndefinedVarianceError
from .estimator import theta_hat_all
from .summaries import Sample, summarize_pair

BRUTE_MAX_NY = 12
MULTISET_GUARD = 10**6
MAX_OVERLAP = 16


@dataclass(frozen=True)
class UrnPair:
    """Two finitely supported probability mass functions over integer colors."""

    px: MappingProxyType
    py: MappingProxyType

    def __init__(self, px, py, tol=1e-12):
        object.__setattr__(self, "px", MappingProxyType(_clean_pmf(px, "px", tol)))
        object.__setattr__(self, "py", MappingProxyType(_clean_pmf(py, "py", tol)))

    @property
    def overlap(self):
        return sorted(set(self.px) & set(self.py))

    @property
    def min_overlap_py(self):
        """Smallest urn-y probability among shared colors (None if no overlap)."""
        ov = self.overlap
        return min(self.py[c] for c in ov) if ov else None

    @property
    def rho(self):
        c = self.min_overlap_py
        return None if c is None else 1.0 - c

    def conditions(self):
        """Regularity conditions (a)-(c) required by the variance and normality results."""
        ov = self.overlap
        py_values = {self.py[c] for c in ov}
        return {
            "finite_overlap": True,
            "nonuniform_overlap": len(py_values) >= 2,
            "unique_x_mass": theta_infinity(self) > 0,
        }

    def regular(self):
        return all(self.conditions().values())

    def to_dict(self):
        return {"x": dict(self.px), "y": dict(self.py)}

    def __reduce__(self):
        # mapping proxies do not pickle; rebuild from plain dicts (worker pools).
        # The maps were validated on construction, so skip the sum check.
        return type(self), (dict(self.px), dict(self.py), math.inf)


def _clean_pmf(pmf, name, tol):
    out = {}
    for color, p in dict(pmf).items():
        p = float(p)
        if not math.isfinite(p) or p < 0:
            raise InvalidInputError(f"{name}[{color!r}] = {p} is not a probability")
        if p > 0:
            out[int(color)] = p
    total = math.fsum(out.values())
    if not out or abs(total - 1.0) > tol:
        raise InvalidInputError(f"{name} sums to {total!r}, expected 1 within {tol}")
    return out


def theta_exact(u: UrnPair, k):
    """``sum_i P_x(i) (1 - P_y(i))**k``: chance an x-draw is unseen in k y-draws."""
    if k < 0:
        raise DomainError(f"k={k} must be nonnegative")
    return math.fsum(p * (1.0 - u.py.get(c, 0.0)) ** k for c, p in u.px.items())


def theta_infinity(u: UrnPair):
    """Urn-x mass on colors urn y never produces."""
    return math.fsum(p for c, p in u.px.items() if c not in u.py)


# -- brute force on data ----------------------------------------------------


def _guard(y):
    if y.n > BRUTE_MAX_NY:
        raise GuardError(f"brute force limited to n_y <= {BRUTE_MAX_NY}, got {y.n}")


def _avoid_counts(x_counts, y_draws, k):
    """Sum of the kernel over all x-draws and k-subsets of y, by color.

    Returns ``(total, per_color, n_subsets)`` where ``per_color[c]`` counts
    the k-subsets not containing color c.
    """
    per_color = Counter()
    n_subsets = 0
    total = 0
    for sub in combinations(y_draws, k):
        seen = set(sub)
        n_subsets += 1
        for c, m in x_counts.items():
            if c not in seen:
                per_color[c] += 1
                total += m
    return total, per_color, n_subsets


def theta_hat_brute(x: Sample, y: Sample, k):
    """Kernel average over every (x-draw, k-subset of y-draws), as an exact Fraction."""
    _guard(y)
    if not 1 <= k <= y.n:
        raise DomainError(f"k={k} outside 1..{y.n}")
    total, _, n_sub = _avoid_counts(x.counts, y.draws(), k)
    return Fraction(total, x.n * n_sub)


def jackknife_brute(x: Sample, y: Sample, k):
    """``(S2_x, S2_y)`` from explicit leave-one-out re-estimates, as Fractions.

    Each x-draw and each y-draw is deleted in turn and the estimator is
    recomputed by enumeration. ``S2_y`` is 0 at ``k = n_y``, where no
    leave-one-y-out estimate exists.
    """
    _guard(y)
    if x.n < 2:
        raise UndefinedVarianceError("jackknife needs n_x >= 2")
    if not 1 <= k <= y.n:
        raise DomainError(f"k={k} outside 1..{y.n}")
    n_x, n_y = x.n, y.n
    full = theta_hat_brute(x, y, k)

    cache = {}
    dev_x = Fraction(0)
    for c in x.draws():
        if c not in cache:
            cache[c] = theta_hat_brute(x.without(c), y, k)
        dev_x += (cache[c] - full) ** 2
    s2x = Fraction(n_x - 1, n_x) * dev_x

    s2y = Fraction(0)
    if k < n_y:
        cache = {}
        dev_y = Fraction(0)
        for c in y.draws():
            if c not in cache:
                cache[c] = theta_hat_brute(x, y.without(c), k)
            dev_y += (cache[c] - full) ** 2
        s2y = Fraction(n_y - 1, n_y) * dev_y
    return s2x, s2y


# -- Hoeffding coefficients ---------------------------------------------------


def xi_1j_exact(u: UrnPair, j, k):
    """``theta(2k - j) - theta(k)**2``: variance of the kernel mean given X_1 and j y-draws."""
    if not 0 <= j <= k:
        raise DomainError(f"need 0 <= j <= k, got j={j}, k={k}")
    return max(theta_exact(u, 2 * k - j) - theta_exact(u, k) ** 2, 0.0)


def _seen_set_distributions(u, j_max):
    """Distribution of which shared colors appear among the first j y-draws, j = 0..j_max.

    Shared colors are indexed by bit; each row of the result is a pmf over
    bitmasks. Built by adding one draw at a time, so all sums are of
    nonnegative terms.
    """
    ov = u.overlap
    if len(ov) > MAX_OVERLAP:
        raise GuardError(f"at most {MAX_OVERLAP} shared colors supported, got {len(ov)}")
    n_masks = 1 << len(ov)
    masks = np.arange(n_masks)
    p_other = 1.0 - math.fsum(u.py[c] for c in ov)
    p_other = max(p_other, 0.0)
    dist = np.zeros((j_max + 1, n_masks))
    dist[0, 0] = 1.0
    for j in range(1, j_max + 1):
        prev = dist[j - 1]
        cur = p_other * prev
        for b, c in enumerate(ov):
            np.add.at(cur, masks | (1 << b), u.py[c] * prev)
        dist[j] = cur
    return ov, masks, dist


def _conditional_values(u, ov, masks, power):
    """Per seen-set value of ``sum_{i not seen} P_x(i) (1 - P_y(i))**power``."""
    base = math.fsum(p for c, p in u.px.items() if c not in u.py)
    w = np.array([u.px[c] * (1.0 - u.py[c]) ** power for c in ov])
    unseen = ((masks[:, None] >> np.arange(len(ov))[None, :]) & 1) == 0
    return base + unseen.astype(np.float64) @ w if len(ov) else np.full(masks.size, base)


def xi_0_all(u: UrnPair, k):
    """``xi_{0,j}(k)`` for ``j = 0..k`` in one pass."""
    if k < 1:
        raise DomainError(f"k={k} must be positive")
    ov, masks, dist = _seen_set_distributions(u, k)
    th = theta_exact(u, k)
    out = np.zeros(k + 1)
    for j in range(1, k + 1):
        v = _conditional_values(u, ov, masks, k - j)
        out[j] = max(math.fsum(dist[j] * v * v) - th * th, 0.0)
    return out


def xi_0j_exact(u: UrnPair, j, k, method="seen-set"):
    """Variance of the kernel mean given the first j y-draws (0 when j = 0).

    ``method="seen-set"`` tracks which shared colors have been seen;
    ``method="multiset"`` enumerates the y-color multisets with multinomial
    weights and is limited to ``MULTISET_GUARD`` multisets.
    """
    if not 0 <= j <= k:
        raise DomainError(f"need 0 <= j <= k, got j={j}, k={k}")
    if j == 0:
        return 0.0
    if method == "seen-set":
        ov, masks, dist = _seen_set_distributions(u, j)
        v = _conditional_values(u, ov, masks, k - j)
        th = theta_exact(u, k)
        return max(math.fsum(dist[j] * v * v) - th * th, 0.0)
    if method != "multiset":
        raise ValueError(f"unknown method {method!r}")
    colors = sorted(u.py)
    if math.comb(len(colors) + j - 1, j) > MULTISET_GUARD:
        raise GuardError("too many y-color multisets to enumerate")
    th = theta_exact(u, k)
    second = []
    for combo, weight in _multisets(u.py, colors, j):
        seen = set(combo)
        v = math.fsum(p * (1.0 - u.py.get(c, 0.0)) ** (k - j) for c, p in u.px.items() if c not in seen)
        second.append(weight * v * v)
    return max(math.fsum(second) - th * th, 0.0)


def _multisets(pmf, colors, n):
    """Yield ``(combo, probability)`` for all size-n multisets of ``colors``."""
    for combo in combinations_with_replacement(colors, n):
        counts = Counter(combo)
        coef = math.factorial(n)
        prob = 1.0
        for c, m in counts.items():
            coef //= math.factorial(m)
            prob *= pmf[c] ** m
        yield combo, coef * prob


def _overlap_weights(n_y, k):
    """``C(k, j) C(n_y - k, k - j) / C(n_y, k)`` for j = 0..k (hypergeometric)."""
    denom = math.comb(n_y, k)
    return np.array([math.comb(k, j) * math.comb(n_y - k, k - j) / denom for j in range(k + 1)])


def hoeffding_variance_exact(u: UrnPair, n_x, n_y, k):
    """Exact variance of the estimator at k for samples of sizes ``(n_x, n_y)``."""
    if n_x < 1 or not 1 <= k <= n_y:
        raise DomainError(f"need n_x >= 1 and 1 <= k <= n_y, got n_x={n_x}, n_y={n_y}, k={k}")
    w = _overlap_weights(n_y, k)
    xi0 = xi_0_all(u, k)
    th2 = theta_exact(u, k) ** 2
    xi1 = np.array([max(theta_exact(u, 2 * k - j) - th2, 0.0) for j in range(k + 1)])
    return max(math.fsum(w * ((n_x - 1) * xi0 + xi1)) / n_x, 0.0)


def projection_variance(u: UrnPair, n_x, n_y, k):
    """Variance of the additive per-observation projection of the estimator."""
    return xi_1j_exact(u, 0, k) / n_x + k * k * xi_0j_exact(u, 1, k) / n_y


# -- exhaustive enumeration of datasets ---------------------------------------


def enumerate_datasets(u: UrnPair, n_x, n_y):
    """Yield ``(probability, x, y)`` over every pair of sample multisets."""
    xs = list(_multisets(u.px, sorted(u.px), n_x))
    ys = list(_multisets(u.py, sorted(u.py), n_y))
    for xcombo, wx in xs:
        x = Sample.from_draws(xcombo)
        for ycombo, wy in ys:
            yield wx * wy, x, Sample.from_draws(ycombo)


def exhaustive_moments(u: UrnPair, n_x, n_y):
    """Exact mean and variance of the estimator for every k, by enumeration.

    Returns two arrays indexed ``k - 1``.
    """
    weights, values = [], []
    for w, x, y in enumerate_datasets(u, n_x, n_y):
        weights.append(w)
        values.append(theta_hat_all(summarize_pair(x, y)).theta)
    weights = np.array(weights)
    values = np.array(values)
    mean = np.array([math.fsum(weights * values[:, c]) for c in range(n_y)])
    var = np.array([math.fsum(weights * (values[:, c] - mean[c]) ** 2) for c in range(n_y)])
    return mean, var
