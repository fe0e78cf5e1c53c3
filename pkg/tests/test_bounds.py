import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sizebias import bounds
from sizebias.bounds import (
    Side,
    TailQuery,
    bound_params,
    iid_bounds,
    lower_tail_bound,
    pattern_bound_params,
    pattern_bound_params_derived,
    tail_bound,
    univariate_bounds,
    upper_tail_bound,
)
from sizebias.errors import InvalidPatternDims, NegativeT, NonPositiveInput


def test_bound_params_unit():
    p = bound_params(1, 1, 1)
    assert p.K1 == 2 and p.K2 == 0.5 and p.sigma_min == 1


def test_bound_params_two_dims():
    p = bound_params([1, 1], [1, 1], 1)
    assert p.K1 == pytest.approx(2 * math.sqrt(2), rel=1e-15)
    assert p.K2 == 0.5


@pytest.mark.parametrize(
    "mu, sigma, K, field",
    [([1, 1], [0, 1], 1, "sigma"), ([0, 1], [1, 1], 1, "mu"), (1, 1, 0, "K"), (1, 1, -2, "K")],
)
def test_bound_params_rejects(mu, sigma, K, field):
    with pytest.raises(NonPositiveInput) as info:
        bound_params(mu, sigma, K)
    assert info.value.field == field


def test_lower_tail_values():
    assert lower_tail_bound(bound_params(1, 1, 1), [0]) == 1.0
    assert lower_tail_bound(bound_params(1, 1, 1), [1]) == pytest.approx(math.exp(-0.25))
    p2 = bound_params([1, 1], [1, 1], 1)
    assert lower_tail_bound(p2, [1, 1]) == pytest.approx(math.exp(-2 / (4 * math.sqrt(2))))
    assert lower_tail_bound(p2, [1, 1]) == pytest.approx(0.7022, abs=5e-5)


def test_upper_tail_values():
    p = bound_params(1, 1, 1)
    assert upper_tail_bound(p, [0]) == 1.0
    assert upper_tail_bound(p, [2]) == pytest.approx(math.exp(-2 / 3))
    assert upper_tail_bound(p, [2]) == pytest.approx(0.5134, abs=5e-5)


def test_negative_t_is_an_error():
    p = bound_params(1, 1, 1)
    for f in (lower_tail_bound, upper_tail_bound):
        with pytest.raises(NegativeT):
            f(p, [-0.1])
    with pytest.raises(NegativeT):
        TailQuery((0.5, -1.0))


def test_tail_query_dispatch():
    p = bound_params([1, 2], [1, 1], 1.5)
    assert tail_bound(p, TailQuery((1.0, 1.0), Side.LOWER)) == lower_tail_bound(p, [1, 1])
    assert tail_bound(p, TailQuery((1.0, 1.0), "upper")) == upper_tail_bound(p, [1, 1])


def test_univariate_values():
    assert univariate_bounds(3, 2, 0) == (1.0, 1.0)
    lo, up = univariate_bounds(4, 1, 4)
    assert lo == pytest.approx(math.exp(-1)) and up == pytest.approx(math.exp(-16 / 20))
    lo, up = univariate_bounds(1, 1, 2)
    assert lo == pytest.approx(math.exp(-1)) and up == pytest.approx(math.exp(-4 / 6))
    with pytest.raises(NonPositiveInput):
        univariate_bounds(0, 1, 1)
    with pytest.raises(NegativeT):
        univariate_bounds(1, 1, -1)


def test_iid_values():
    assert iid_bounds(4, 0.5, 0.25, 1, [0, 0, 0, 0]) == (1.0, 1.0)
    lo, up = iid_bounds(4, 0.5, 0.25, 1, [1, 1, 1, 1])  # ||t|| = 2
    assert lo == pytest.approx(math.exp(-0.25))
    assert up == pytest.approx(math.exp(-0.2))


def test_iid_matches_generic_path_lower_tail():
    # The generic constants with all mu, sigma equal give K1 = 2K sqrt(k) mu / sigma^2,
    # which is exactly the i.i.d. lower-tail exponent.
    k, mu, s2, K = 5, 0.7, 0.3, 2.0
    p = bound_params([mu] * k, [math.sqrt(s2)] * k, K)
    t = [0.4] * k
    assert iid_bounds(k, mu, s2, K, t)[0] == pytest.approx(lower_tail_bound(p, t), rel=1e-12)


def test_pattern_constants():
    K1, K2 = pattern_bound_params(100, 3, 1)
    assert K1 == 30.0
    assert K2 == pytest.approx(1.5, rel=1e-15)
    D1, D2 = pattern_bound_params_derived(100, 3, 1)
    assert D1 == 60.0 and D2 == K2
    with pytest.raises(InvalidPatternDims):
        pattern_bound_params(10, 2, 1)
    with pytest.raises(InvalidPatternDims):
        pattern_bound_params(2, 3, 1)
    with pytest.raises(InvalidPatternDims):
        pattern_bound_params(20, 13, 1)


def test_derived_pattern_constants_match_generic_path():
    # Feed the generic formula K = sqrt(k)(2m-1) and the variance lower bound.
    for n, m, k in [(10, 3, 1), (50, 4, 3), (200, 5, 2)]:
        f = math.factorial(m)
        sigma = math.sqrt(n * (f - 2 * m + 1)) / f
        p = bound_params([n / f] * k, [sigma] * k, math.sqrt(k) * (2 * m - 1))
        D1, D2 = pattern_bound_params_derived(n, m, k)
        assert p.K1 == pytest.approx(D1, rel=1e-12)
        assert p.K2 == pytest.approx(D2, rel=1e-12)


def test_univariate_reduction_sweep():
    rnd = random.Random(7)
    for _ in range(100):
        mu, K, t = rnd.uniform(0.1, 50), rnd.uniform(0.1, 10), rnd.uniform(0, 30)
        sigma = rnd.uniform(0.05, 20)
        p = bound_params(mu, sigma, K)
        lo, up = univariate_bounds(mu, K, t)
        assert lo == pytest.approx(lower_tail_bound(p, [t / sigma]), rel=1e-12)
        assert up == pytest.approx(upper_tail_bound(p, [t / sigma]), rel=1e-12)


# ranges keep exp(-...) well above float underflow
finite = st.floats(min_value=0.5, max_value=100, allow_nan=False)


@given(st.lists(finite, min_size=1, max_size=4), finite, st.lists(st.floats(0, 5), min_size=1, max_size=4))
def test_bound_properties(mu, K, t):
    k = len(mu)
    t = (t * k)[:k]
    p = bound_params(mu, [1.0] * k, K)
    lo, up = lower_tail_bound(p, t), upper_tail_bound(p, t)
    assert 0 < lo <= 1 and 0 < up <= 1
    assert up >= lo
    bigger = bound_params(mu, [1.0] * k, 2 * K)
    assert lower_tail_bound(bigger, t) >= lo and upper_tail_bound(bigger, t) >= up
    if any(x > 1e-3 for x in t):
        assert lo < 1 and up < 1
        scaled = [2 * x for x in t]
        assert lower_tail_bound(p, scaled) < lo
        assert upper_tail_bound(p, scaled) < up


def test_pattern_params_uses_closed_form_or_derived():
    a = bounds.pattern_params(100, 3, 2, derived=False)
    b = bounds.pattern_params(100, 3, 2)
    assert a.K1 == pattern_bound_params(100, 3, 2)[0]
    assert b.K1 == pattern_bound_params_derived(100, 3, 2)[0]
