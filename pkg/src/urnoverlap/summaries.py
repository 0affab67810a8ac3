"""Samples and their reduction to the sufficient statistics Q and M.

Every statistic in this package depends on the two samples only through
their multisets of colors, so a :class:`Sample` is stored as a count map.
For one ordered pair ``(x, y)``:

``Q(j)``
    number of x-draws whose color occurs exactly ``j`` times in ``y``;
``M(i, j)``
    number of colors occurring ``i`` times in ``x`` and ``j`` times in ``y``.

``M`` keeps the ``i = 0`` rows (colors seen only in ``y``); the y-side
jackknife needs them.
"""

from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class Sample:
    """A multiset of color ids, e.g. one column of an OTU table."""

    counts: MappingProxyType

    def __init__(self, counts):
        clean = {}
        for color, mult in dict(counts).items():
            if isinstance(color, bool) or not isinstance(color, (int, np.integer)) or color < 0:
                raise InvalidInputError(f"color ids must be nonnegative integers, got {color!r}")
            if isinstance(mult, bool) or not isinstance(mult, (int, np.integer)):
                raise InvalidInputError(f"multiplicity of color {color} is not an integer: {mult!r}")
            if mult < 0:
                raise InvalidInputError(f"negative multiplicity for color {color}")
            if mult:
                clean[int(color)] = int(mult)
        if not clean:
            raise InvalidInputError("empty sample")
        object.__setattr__(self, "counts", MappingProxyType(clean))

    @classmethod
    def from_draws(cls, draws):
        """Build a sample from a sequence of observed colors."""
        return cls(Counter(draws))

    @property
    def n(self):
        return sum(self.counts.values())

    def draws(self):
        """Expand back to a sorted list of draws (used by the brute-force oracles)."""
        out = []
        for color in sorted(self.counts):
            out.extend([color] * self.counts[color])
        return out

    def without(self, color):
        """Copy of the sample with one draw of ``color`` removed."""
        counts = dict(self.counts)
        counts[color] -= 1
        return Sample(counts)

    def __len__(self):
        return self.n

    def __reduce__(self):
        return type(self), (dict(self.counts),)

    def __repr__(self):
        return f"Sample({dict(self.counts)!r})"


@dataclass(frozen=True)
class PairedSummary:
    """Sufficient statistics of an ordered sample pair (x, y)."""

    n_x: int
    n_y: int
    q: MappingProxyType = field(repr=False)
    m: MappingProxyType = field(repr=False)

    @cached_property
    def q_support(self):
        """``(js, counts)`` arrays over the j with ``Q(j) > 0``, j ascending."""
        js = np.array(sorted(self.q), dtype=np.int64)
        vals = np.array([self.q[j] for j in js], dtype=np.float64)
        return js, vals

    @cached_property
    def m_by_j(self):
        """Map ``j -> (i values, M(i, j) values)`` restricted to ``j >= 1``."""
        groups = {}
        for (i, j), cnt in sorted(self.m.items()):
            if j >= 1:
                groups.setdefault(j, ([], []))
                groups[j][0].append(i)
                groups[j][1].append(cnt)
        return {
            j: (np.array(iv, dtype=np.float64), np.array(cv, dtype=np.float64))
            for j, (iv, cv) in groups.items()
        }

    def __repr__(self):
        return f"PairedSummary(n_x={self.n_x}, n_y={self.n_y}, q={dict(self.q)})"


def summarize_pair(x, y):
    """Reduce the pair ``(x, y)`` to :class:`PairedSummary`.

    >>> s = summarize_pair(Sample({1: 1, 2: 1}), Sample({1: 2, 3: 1}))
    >>> dict(s.q), sorted(s.m.items())
    ({2: 1, 0: 1}, [((0, 1), 1), ((1, 0), 1), ((1, 2), 1)])
    """
    if not isinstance(x, Sample) or not isinstance(y, Sample):
        raise InvalidInputError("summarize_pair expects two Sample objects")
    xc, yc = x.counts, y.counts
    q = Counter()
    m = Counter()
    for color, i in xc.items():
        j = yc.get(color, 0)
        q[j] += i
        m[i, j] += 1
    for color, j in yc.items():
        if color not in xc:
            m[0, j] += 1
    return PairedSummary(
        n_x=x.n, n_y=y.n, q=MappingProxyType(dict(q)), m=MappingProxyType(dict(m))
    )
