import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from urnoverlap import DomainError, Sample, derivative_at_ny, discrete_derivative, rho_regression, summarize_pair, theta_hat_all
from urnoverlap.estimator import DissimilaritySeries
from urnoverlap.heuristics import default_window
from urnoverlap.oracle import UrnPair, theta_exact


def exact_series(u, n_x, n_y):
    return DissimilaritySeries(n_x, n_y, [theta_exact(u, k) for k in range(1, n_y + 1)])


def test_fix_a_derivative(fix_a):
    series = theta_hat_all(summarize_pair(*fix_a))
    np.testing.assert_allclose(discrete_derivative(series), [-1 / 6, 0], atol=1e-12)
    assert derivative_at_ny(series) == pytest.approx(0, abs=1e-12)


def test_derivative_needs_two_y_draws():
    series = theta_hat_all(summarize_pair(Sample({1: 2}), Sample({1: 1})))
    with pytest.raises(DomainError):
        discrete_derivative(series)


def test_geometric_series_recovers_rate():
    # P_x(1) = 1, P_y(1) = 0.3: theta(k) = 0.7**k, differences 0.3 * 0.7**(k-1)
    series = exact_series(UrnPair({1: 1.0}, {1: 0.3, 2: 0.7}), 10, 40)
    np.testing.assert_allclose(series.theta, 0.7 ** np.arange(1, 41), rtol=1e-14)
    rep = rho_regression(series, 2, 40)
    assert abs(rep.rho_hat - 0.7) <= 1e-9
    assert rep.slope == pytest.approx(math.log(0.7), abs=1e-12)
    assert rep.intercept == pytest.approx(math.log(0.3 / 0.7), abs=1e-10)
    assert rep.max_abs_residual < 1e-9
    assert rep.rho_hat_pow_ny == pytest.approx(0.7**40, rel=1e-8)
    assert rep.points_used == 39 and rep.points_dropped == 0 and not rep.degenerate


def test_disjoint_pair_degenerate():
    series = theta_hat_all(summarize_pair(Sample({1: 5}), Sample({2: 6})))
    rep = rho_regression(series)
    assert rep.degenerate
    assert rep.rho_hat == 0 and rep.max_abs_residual == 0
    assert derivative_at_ny(series) == 0


def test_noisy_curve_reports_large_residual(rng):
    x = Sample.from_draws(rng.zipf(1.3, size=300).tolist())
    y = Sample.from_draws(rng.zipf(1.3, size=300).tolist())
    rep = rho_regression(theta_hat_all(summarize_pair(x, y)), 2, 300)
    assert rep.max_abs_residual > 1e-3


@pytest.mark.parametrize("n_y, want", [(2, (2, 2)), (3, (2, 3)), (10, (6, 10)), (8655, (5193, 8655))])
def test_default_window(n_y, want):
    assert default_window(n_y) == want


@pytest.mark.parametrize("lo, hi", [(1, 5), (4, 3), (2, 11)])
def test_bad_window(lo, hi):
    series = DissimilaritySeries(2, 10, np.linspace(1, 0.5, 10))
    with pytest.raises(DomainError):
        rho_regression(series, lo, hi)


def test_report_dict_is_plain():
    series = DissimilaritySeries(2, 10, 0.5 ** np.arange(1, 11))
    d = rho_regression(series).to_dict()
    assert d["window"] == [6, 10]
    assert d["rho_hat"] == pytest.approx(0.5, abs=1e-12)


@given(st.floats(0.05, 0.95), st.floats(0.0, 0.9), st.integers(5, 60))
@settings(max_examples=50)
def test_shifted_geometric_rate(rho, floor, n_y):
    # adding a constant limit does not change the fitted rate, as long as
    # the tail differences stay well above rounding of the floor
    assume((1 - floor) * rho**n_y > 1e-8)
    theta = floor + (1 - floor) * rho ** np.arange(1, n_y + 1)
    rep = rho_regression(DissimilaritySeries(2, n_y, theta), 2, n_y)
    if not rep.degenerate:
        assert rep.rho_hat == pytest.approx(rho, rel=1e-6)
