"""Self-check suite behind ``urnoverlap validate``.

Compares the closed forms against the enumeration oracles on random small
instances and on exactly enumerable urn pairs. Each check yields a
:class:`CheckResult`; the CLI exits nonzero if any fails.
"""

import math
from dataclasses import dataclass

import numpy as np

from .estimator import theta_hat, theta_hat_all
from .oracle import (
    UrnPair,
    exhaustive_moments,
    hoeffding_variance_exact,
    jackknife_brute,
    theta_exact,
    theta_hat_brute,
)
from .summaries import Sample, summarize_pair
from .variance import jackknife_total

TOL = 1e-12

SMALL_URNS = (
    UrnPair({1: 0.5, 2: 0.5}, {1: 0.5, 2: 0.5}),
    UrnPair({1: 0.2, 2: 0.3, 3: 0.5}, {1: 0.6, 3: 0.3, 4: 0.1}),
    UrnPair({1: 0.7, 2: 0.3}, {2: 0.25, 3: 0.75}),
    UrnPair({1: 1.0}, {1: 0.4, 2: 0.6}),
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: worst deviation {self.worst:.3e} {self.detail}".rstrip()


def random_pair(rng, max_nx=6, max_ny=8, max_colors=4, min_nx=1):
    """A random sample pair drawn from random small urns."""
    n_colors = int(rng.integers(1, max_colors + 1))
    px = rng.dirichlet(np.ones(n_colors))
    py = rng.dirichlet(np.ones(n_colors))
    n_x = int(rng.integers(min_nx, max_nx + 1))
    n_y = int(rng.integers(1, max_ny + 1))
    x = Sample.from_draws(rng.choice(n_colors, size=n_x, p=px).tolist())
    # shift y colors by a random offset so that disjoint supports also occur
    offset = int(rng.integers(0, 2))
    y = Sample.from_draws((rng.choice(n_colors, size=n_y, p=py) + offset).tolist())
    return x, y


def check_kernel(pairs):
    worst = 0.0
    for x, y in pairs:
        s = summarize_pair(x, y)
        series = theta_hat_all(s)
        for k in range(1, y.n + 1):
            brute = theta_hat_brute(x, y, k)
            worst = max(worst, float(abs(theta_hat(s, k) - brute)), float(abs(series.at(k) - brute)))
    return CheckResult("estimator equals brute-force kernel average", worst <= TOL, worst)


def check_jackknife(pairs):
    worst = 0.0
    for x, y in pairs:
        if x.n < 2:
            continue
        s = summarize_pair(x, y)
        series = theta_hat_all(s)
        var = jackknife_total(s, series)
        for k in range(1, y.n + 1):
            bx, by = jackknife_brute(x, y, k)
            worst = max(worst, float(abs(var.var_x[k - 1] - bx)), float(abs(var.var_y[k - 1] - by)))
    return CheckResult("jackknife equals leave-one-out recomputation", worst <= TOL, worst)


def check_unbiased(urns=SMALL_URNS, max_nx=3, max_ny=4):
    worst = 0.0
    for u in urns:
        for n_x in range(1, max_nx + 1):
            for n_y in range(1, max_ny + 1):
                mean, _ = exhaustive_moments(u, n_x, n_y)
                exact = np.array([theta_exact(u, k) for k in range(1, n_y + 1)])
                worst = max(worst, float(np.max(np.abs(mean - exact))))
    return CheckResult("exact unbiasedness by dataset enumeration", worst <= TOL, worst)


def check_hoeffding(urns=SMALL_URNS, max_nx=3, max_ny=4):
    worst = 0.0
    for u in urns:
        for n_x in range(1, max_nx + 1):
            for n_y in range(1, max_ny + 1):
                _, var = exhaustive_moments(u, n_x, n_y)
                for k in range(1, n_y + 1):
                    worst = max(worst, float(abs(var[k - 1] - hoeffding_variance_exact(u, n_x, n_y, k))))
    return CheckResult("exact variance formula by dataset enumeration", worst <= TOL, worst)


def check_closed_form_stderr(pairs):
    worst = 0.0
    for x, y in pairs:
        if x.n < 2:
            continue
        s = summarize_pair(x, y)
        series = theta_hat_all(s)
        var = jackknife_total(s, series)
        th = series.theta[-1]
        worst = max(worst, float(abs(var.stderr[-1] - math.sqrt(th * (1 - th) / (x.n - 1)))))
    return CheckResult("standard error at k = n_y matches its closed form", worst <= TOL, worst)


def run_validation(seed=0, n_pairs=200):
    rng = np.random.default_rng(seed)
    pairs = [random_pair(rng) for _ in range(n_pairs)]
    return [
        check_kernel(pairs),
        check_jackknife(pairs),
        check_closed_form_stderr(pairs),
        check_unbiased(),
        check_hoeffding(),
    ]
