import itertools
import math
from fractions import Fraction as F

import pytest

import brute
from conftest import MODELS
from sizebias.couplings import IndependentModel, window_model
from sizebias.errors import StateSpaceTooLarge
from sizebias.model import Pmf, moments, size_bias_exact
from sizebias.oracle import (
    check_bounds,
    enumerate_law,
    exact_coupling_audit,
    exact_tails,
    lex_permutations,
    next_permutation,
)
from sizebias.patterns import PatternModel, pattern_mean, pattern_variance_exact
from sizebias.specs import load_model


def test_next_permutation_examples():
    a = [1, 2, 3]
    assert next_permutation(a) and a == [1, 3, 2]
    a = [3, 2, 1]
    assert not next_permutation(a)


@pytest.mark.parametrize("n", [1, 3, 5])
def test_lex_permutations_order(n):
    perms = list(lex_permutations(n))
    assert perms == list(itertools.permutations(range(1, n + 1)))
    assert len(perms) == math.factorial(n)


def test_lex_permutations_by_first_value():
    block = list(lex_permutations(4, first=3))
    assert len(block) == 6 and all(p[0] == 3 for p in block)
    assert block == sorted(block)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_enumerated_pattern_moments(n):
    taus = [(1, 2, 3), (1, 3, 2), (2, 3, 1)]
    law = enumerate_law(PatternModel(n, taus))
    assert law == Pmf(brute.count_law(n, taus))
    mom = moments(law, check=False)
    for j, tau in enumerate(taus):
        assert mom.mu[j] == pattern_mean(n, 3)
        assert mom.sigma2[j] == pattern_variance_exact(n, tau)


def test_enumeration_worker_invariance():
    model = PatternModel(7, [(1, 2, 3), (3, 1, 2)])
    assert enumerate_law(model, workers=1) == enumerate_law(model, workers=3)
    a = exact_coupling_audit(model, 2, workers=1)
    b = exact_coupling_audit(model, 2, workers=3)
    assert a == b


@pytest.mark.parametrize(
    "taus", [[(1, 2, 3)], [(1, 3, 2)], [(1, 2, 3), (3, 2, 1)], [(2, 1, 3), (1, 3, 2)]]
)
@pytest.mark.parametrize("n", [5, 6])
def test_pattern_coupling_is_size_biased(n, taus):
    model = PatternModel(n, taus)
    law = enumerate_law(model)
    m = model.m
    for i in range(1, model.k + 1):
        audit = exact_coupling_audit(model, i)
        assert audit.is_size_biased(law)
        assert audit.law == Pmf(brute.size_biased(brute.count_law(n, taus), i))
        assert all(g <= 2 * m - 1 for g in audit.max_gap)
        assert audit.max_radius <= model.radius + 1e-12


def test_identity_coupling_is_not_size_biased():
    model = PatternModel(6, [(1, 2, 3)], coupling="identity")
    law = enumerate_law(model)
    audit = exact_coupling_audit(model, 1)
    assert audit.law == law
    assert not audit.is_size_biased(law)
    assert audit.max_radius_sq == 0


def test_local_cycle_audit():
    model = load_model(MODELS / "local_cycle5.json")
    law = enumerate_law(model)
    for i in range(1, 6):
        audit = exact_coupling_audit(model, i)
        assert audit.is_size_biased(law)
        assert audit.max_radius_sq <= 3  # b = 3 neighbours, M = 1
        # the only statistics touched are W_{i-1}, W_i, W_{i+1}
        untouched = [j for j in range(5) if (j - (i - 1)) % 5 not in (0, 1, 4)]
        assert all(audit.max_gap[j] == 0 for j in untouched)


def test_local_window_sum_audit():
    model = window_model(6, 3, Pmf.uniform([0, 1, 2]), "window_sum", 6)
    law = enumerate_law(model)
    for i in (1, 4):
        assert exact_coupling_audit(model, i).is_size_biased(law)


def test_independent_audit():
    model = load_model(MODELS / "independent3.json")
    law = enumerate_law(model)
    assert law == Pmf.product(model.components)
    for i in (1, 2, 3):
        audit = exact_coupling_audit(model, i)
        assert audit.law == size_bias_exact(law, i)
        assert [j for j, g in enumerate(audit.max_gap) if g] in ([i - 1], [])


def test_state_space_caps():
    with pytest.raises(StateSpaceTooLarge):
        enumerate_law(PatternModel(12, [(1, 2, 3)]))
    big = IndependentModel([Pmf.uniform(range(10))] * 7)
    with pytest.raises(StateSpaceTooLarge):
        enumerate_law(big)


def test_exact_tails_bernoulli():
    law = Pmf.bernoulli("1/2")  # standardized values are -1 and +1
    table = exact_tails(law, [0, 0.5, 1, 1.5, 100])
    assert table.lower == (F(1, 2), F(1, 2), F(1, 2), F(0), F(0))
    assert table.upper == table.lower


def test_exact_tails_monotone():
    law = enumerate_law(PatternModel(6, [(1, 3, 2)]))
    table = exact_tails(law, [x / 4 for x in range(20)])
    assert list(table.lower) == sorted(table.lower, reverse=True)
    assert list(table.upper) == sorted(table.upper, reverse=True)


def test_exact_tails_vector_grid():
    law = Pmf.product([Pmf.bernoulli("1/2")] * 2)
    table = exact_tails(law, [(1, 1), (0, 1), (0, 2)])
    assert table.lower == (F(1, 4), F(1, 4), F(0))
    with pytest.raises(ValueError):
        exact_tails(law, [(1, 1, 1)])


@pytest.mark.parametrize(
    "model",
    [
        PatternModel(6, [(1, 2, 3)]),
        PatternModel(6, [(1, 3, 2)]),
        PatternModel(5, [(1, 2, 3), (2, 1, 3)]),
    ],
    ids=["ident", "132", "pair"],
)
def test_bounds_hold_exactly(model):
    check = check_bounds(model, [0, 0.5, 1, 2, 4])
    assert check.holds()
    assert check.K == max(a.max_radius for a in check.audits)
