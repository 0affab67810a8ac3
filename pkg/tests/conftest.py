import numpy as np
import pytest
from hypothesis import strategies as st

from urnoverlap import Sample


@pytest.fixture
def fix_a():
    """x = {1:1, 2:1}, y = {1:2, 3:1}: estimates 2/3, 1/2, 1/2."""
    return Sample({1: 1, 2: 1}), Sample({1: 2, 3: 1})


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def samples(max_n, max_color=4, min_n=1):
    return st.lists(st.integers(0, max_color), min_size=min_n, max_size=max_n).map(Sample.from_draws)


small_x = samples(6, min_n=2)
small_y = samples(8)
