"""Independent brute-force references for the test suite.

Nothing here imports the package's counting or enumeration code.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction


def ranks(values):
    s = sorted(values)
    return tuple(s.index(v) + 1 for v in values)


def window(pi, s, m):
    n = len(pi)
    return [pi[(s - 1 + a) % n] for a in range(m)]


def count(pi, tau):
    return sum(ranks(window(pi, s, len(tau))) == tuple(tau) for s in range(1, len(pi) + 1))


def count_law(n, taus):
    """Exact law of the count vector over S_n as {vector: Fraction}."""
    c = Counter(tuple(count(p, t) for t in taus) for p in itertools.permutations(range(1, n + 1)))
    total = math.factorial(n)
    return {w: Fraction(v, total) for w, v in c.items()}


def mean_var(law, j=0):
    mu = sum(p * w[j] for w, p in law.items())
    return mu, sum(p * w[j] ** 2 for w, p in law.items()) - mu * mu


def size_biased(law, i):
    """{x: x_i p(x) / mu_i} for a dict law, 1-based i."""
    mu = sum(p * x[i - 1] for x, p in law.items())
    return {x: x[i - 1] * p / mu for x, p in law.items() if x[i - 1] != 0}
