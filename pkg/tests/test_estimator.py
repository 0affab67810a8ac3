import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urnoverlap import DomainError, LogFactorialTable, Sample, binom_ratio, summarize_pair, theta_hat, theta_hat_all
from urnoverlap.estimator import ratio_table
from urnoverlap.oracle import theta_hat_brute

from conftest import small_x, small_y


def exact_ratio(n, j, k):
    return Fraction(math.comb(n - j, k), math.comb(n, k))


def test_log_factorial_against_lgamma():
    t = LogFactorialTable(10)
    for n in (0, 1, 5, 10, 250, 4000):
        assert t[n] == pytest.approx(math.lgamma(n + 1), rel=1e-14, abs=1e-14)
    assert t.n_max >= 4000
    assert t.log_binom(10, 3) == pytest.approx(math.log(120), rel=1e-14)


def test_binom_ratio_hand_value():
    assert binom_ratio(3, 2, 1) == pytest.approx(1 / 3, abs=1e-15)


@pytest.mark.parametrize("method", ["logfact", "product"])
def test_binom_ratio_edges(method):
    assert binom_ratio(5, 0, 3, method=method) == 1.0
    assert binom_ratio(5, 3, 0, method=method) == 1.0
    assert binom_ratio(5, 3, 3, method=method) == 0.0
    with pytest.raises(DomainError):
        binom_ratio(3, 0, 4, method=method)


def test_binom_ratio_rejects_bad_args():
    with pytest.raises(DomainError):
        binom_ratio(3, -1, 1)
    with pytest.raises(ValueError):
        binom_ratio(5, 1, 1, method="magic")


@given(st.integers(1, 3000), st.data())
@settings(max_examples=200)
def test_binom_ratio_matches_exact(n, data):
    k = data.draw(st.integers(0, n))
    j = data.draw(st.integers(0, n))
    want = float(exact_ratio(n, j, k)) if j <= n - k else 0.0
    assert binom_ratio(n, j, k) == pytest.approx(want, rel=1e-11, abs=1e-300)
    assert binom_ratio(n, j, k, method="product") == pytest.approx(want, rel=1e-15, abs=1e-300)


def test_ratio_table_matches_comb():
    n = 40
    js = [0, 1, 7, 39, 40]
    tab = ratio_table(n, js, n)
    for a, j in enumerate(js):
        for k in range(n + 1):
            want = float(exact_ratio(n, j, k)) if j <= n - k else 0.0
            assert tab[a, k] == pytest.approx(want, rel=1e-12, abs=1e-300)
        assert np.all(np.diff(tab[a]) <= 0)


def test_fix_a_per_k(fix_a):
    s = summarize_pair(*fix_a)
    assert theta_hat(s, 1) == pytest.approx(2 / 3, abs=1e-12)
    assert theta_hat(s, 2) == pytest.approx(1 / 2, abs=1e-12)
    assert theta_hat(s, 3) == pytest.approx(1 / 2, abs=1e-12)
    with pytest.raises(DomainError):
        theta_hat(s, 4)
    with pytest.raises(DomainError):
        theta_hat(s, 0)


def test_fix_a_series(fix_a):
    series = theta_hat_all(summarize_pair(*fix_a))
    np.testing.assert_allclose(series.theta, [2 / 3, 1 / 2, 1 / 2], atol=1e-12)
    assert series.ks.tolist() == [1, 2, 3]
    assert series.stderr is None


def test_full_k_is_unseen_fraction(fix_a):
    # at k = n_y only colors absent from y count: Q(0)/n_x, not Q(0)/n_y
    s = summarize_pair(*fix_a)
    assert theta_hat_all(s).at(3) == s.q[0] / s.n_x


def test_disjoint_constant_one():
    series = theta_hat_all(summarize_pair(Sample({1: 4}), Sample({2: 3, 3: 1})))
    assert np.all(series.theta == 1.0)


def test_nested_zero():
    series = theta_hat_all(summarize_pair(Sample({1: 2}), Sample({1: 5})))
    assert series.at(5) == 0.0


def test_series_matches_single_k_at_n100(rng):
    x = Sample.from_draws(rng.integers(0, 30, size=100).tolist())
    y = Sample.from_draws(rng.integers(0, 30, size=100).tolist())
    s = summarize_pair(x, y)
    series = theta_hat_all(s)
    single = np.array([theta_hat(s, k) for k in range(1, 101)])
    np.testing.assert_allclose(series.theta, single, atol=1e-12, rtol=0)


@given(small_x, small_y)
@settings(max_examples=100, deadline=None)
def test_series_matches_brute(x, y):
    series = theta_hat_all(summarize_pair(x, y))
    for k in range(1, y.n + 1):
        assert abs(series.at(k) - theta_hat_brute(x, y, k)) <= 1e-12


def test_large_pair_values_in_range(rng):
    x = Sample.from_draws(rng.zipf(1.5, size=10_000).tolist())
    y = Sample.from_draws(rng.zipf(1.5, size=10_000).tolist())
    th = theta_hat_all(summarize_pair(x, y)).theta
    assert np.all((th >= 0) & (th <= 1))
    assert np.all(np.diff(th) <= 0)
