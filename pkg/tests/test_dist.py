import itertools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from symtri.dist import (TRIPLES, SymmetricDist, bit_to_outcome, constant, e3_interval,
                         marginal1, marginal2, mpf_to_fraction, outcome_to_bit, prob, q1_poly,
                         q2_poly, quartic, rationalize, target_distribution)

corr = st.fractions(min_value=-1, max_value=1, max_denominator=30)


def test_outcome_bits():
    assert outcome_to_bit(1) == 0 and outcome_to_bit(-1) == 1
    assert [bit_to_outcome(b) for b in (0, 1)] == [1, -1]


def test_uniform_and_deterministic():
    u = SymmetricDist(Fraction(0), Fraction(0), Fraction(0))
    assert all(prob(u, *t) == Fraction(1, 8) for t in TRIPLES)
    d = SymmetricDist(Fraction(1), Fraction(1), Fraction(1))
    assert prob(d, 1, 1, 1) == 1


@given(corr, corr, corr)
def test_probabilities_sum_to_one_and_marginals_agree(e1, e2, e3):
    d = SymmetricDist(e1, e2)
    p = {t: (1 + sum(t) * e1 + (t[0]*t[1] + t[0]*t[2] + t[1]*t[2]) * e2 + t[0]*t[1]*t[2] * e3) / 8
         for t in TRIPLES}
    assert sum(p.values()) == 1
    q1, q2 = marginal1(d), marginal2(d)
    for a in (1, -1):
        assert q1(a) == sum(v for t, v in p.items() if t[0] == a)
        assert q1_poly(a)(e1, e2) == q1(a)
        for b in (1, -1):
            assert q2(a, b) == sum(v for t, v in p.items() if t[:2] == (a, b))
            assert q2_poly(a, b)(e1, e2) == q2(a, b)


def _brute_interval(e1, e2):
    """Feasible E3 by intersecting the eight half-lines one at a time."""
    lo, hi = Fraction(-1), Fraction(1)
    for a, b, c in itertools.product((1, -1), repeat=3):
        rest = 1 + (a + b + c) * e1 + (a*b + a*c + b*c) * e2
        s = a * b * c
        if s == 1:
            lo = max(lo, -rest)
        else:
            hi = min(hi, rest)
    return lo, hi


@given(corr, corr)
def test_e3_interval_matches_positivity(e1, e2):
    iv = e3_interval(e1, e2)
    lo, hi = _brute_interval(e1, e2)
    assert iv.empty == (lo > hi)
    if not iv.empty:
        assert (iv.lower, iv.upper) == (lo, hi)
        SymmetricDist(e1, e2, iv.lower)
        SymmetricDist(e1, e2, iv.upper)
        assert iv.midpoint in iv


def test_e3_interval_examples():
    assert e3_interval(Fraction(0), Fraction(0)) == (Fraction(-1), Fraction(1))
    assert e3_interval(Fraction(9, 10), Fraction(0)).empty
    iv = e3_interval(Fraction(1, 5), Fraction(-1, 3))
    assert iv.width == 0 and iv.lower == Fraction(-3, 5)


def test_invalid_dist_rejected():
    with pytest.raises(ValueError):
        SymmetricDist(Fraction(2), Fraction(0))
    with pytest.raises(ValueError):
        SymmetricDist(Fraction(9, 10), Fraction(0), Fraction(0))


def test_constants_values():
    with mpmath.workprec(200):
        e1c = constant("E1C")
        assert abs(float(e1c.value) - 0.17533849588809) < 1e-13
        q = mpmath.mpf(e1c.rational.numerator) / e1c.rational.denominator
        assert abs(e1c.value - q) == e1c.bound
        assert e1c.bound < 1e-20
        e3c = constant("E3C")
        assert abs(e3c.value + 3 * e1c.value) < mpmath.mpf(2) ** -190
        x = constant("X_ROOT").value
        assert 0 < x < 1
        assert abs(quartic(x)) < mpmath.mpf(10) ** -50
        y = constant("Y_VALUE").value
        assert abs(y - 1 / (3 * (2 * x**2 - 2 * x + 1))) < mpmath.mpf(10) ** -50


def test_constants_precision_floor_and_tags():
    with pytest.raises(ValueError):
        constant("E1C", precision=32)
    with pytest.raises(ValueError):
        constant("PI")
    lo = constant("E1C", precision=64)
    assert abs(float(lo.value) - float(constant("E1C").value)) < 1e-15


def test_mpf_to_fraction_is_exact():
    with mpmath.workprec(80):
        v = mpmath.mpf(-3) / 7
        q = mpf_to_fraction(v)
        assert mpmath.mpf(q.numerator) / q.denominator == v
        assert q < 0
    assert rationalize(mpmath.mpf("0.5")) == Fraction(1, 2)


def test_target_distribution_is_valid():
    d = target_distribution()
    assert d.e2 == Fraction(-1, 3)
    assert d.e3 == -3 * d.e1
    assert sum(d.prob(*t) for t in TRIPLES) == 1
