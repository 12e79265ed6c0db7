import random
from fractions import Fraction

import gmpy2
import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from divseries.arith import divisor_sieve
from divseries.construction import build_plan
from divseries.digits import ScaledInteger
from divseries.series import (
    SeriesSpec,
    Verdict,
    certified_prefix,
    certified_prefix_at,
    lemma1_census,
    margin_threshold,
    partial_sum,
    tail_compare,
    tail_enclosure,
    tail_upper_bound,
)

from oracles import digits_of, oracle_digits

EB = SeriesSpec.constant(2, 1)
ALT = SeriesSpec.alternating(2)


def _summed_tail(b, M, terms=4000):
    return sum(Fraction(n, b**n) for n in range(M + 1, M + terms))


def test_tail_upper_bound_examples():
    assert tail_upper_bound(2, 0, 1) == 2
    assert tail_upper_bound(2, 3, 1) == Fraction(5, 8)
    assert tail_upper_bound(10, 0, 3) == Fraction(30, 81)


@pytest.mark.parametrize("b,M", [(2, 0), (2, 3), (3, 7), (10, 0), (7, 12)])
def test_tail_bound_closed_form_matches_summation(b, M):
    # the closed form equals sum_{n>M} n / b**n; the truncated sum approaches it from below
    bound = tail_upper_bound(b, M, 1)
    s = _summed_tail(b, M, 3000)
    assert s < bound
    assert bound - s < Fraction(1, 10**100)


def test_spec_rules():
    assert EB.nonzero_alphabet and ALT.nonzero_alphabet
    assert not SeriesSpec.explicit(10, [1, 1, 1]).nonzero_alphabet
    assert ALT.coefficients(1, 4).tolist() == [-1, 1, -1, 1]
    per = SeriesSpec.periodic(3, [2, -1, 1])
    assert per.coefficients(1, 7).tolist() == [per.coefficient(n) for n in range(1, 8)]
    assert per.alphabet == {2, -1, 1} and per.max_abs == 2
    assert SeriesSpec.parse(5, "periodic:2,-1,1") == per.__class__(5, "periodic", (2, -1, 1))
    ex = SeriesSpec.explicit(10, [1, -3])
    assert ex.max_abs_after(1) == 3 and ex.max_abs_after(2) == 0
    assert ex.tail_sign(1) == -1


def test_partial_sum_is_exact():
    for spec in (EB, ALT, SeriesSpec.periodic(3, [2, -1])):
        d = divisor_sieve(30)
        expected = sum(Fraction(int(d[n - 1]) * spec.coefficient(n), spec.base**n) for n in range(1, 31))
        assert partial_sum(spec, 30).to_fraction() == expected


def test_erdos_borwein_first_digits():
    res = certified_prefix(EB, 8)
    assert res.certified_length >= 8
    assert res.digits.integer_part == 1
    assert res.digits.digits[:8] == (1, 0, 0, 1, 1, 0, 1, 1)


def test_forced_tiny_truncation_certifies_nothing():
    res = certified_prefix(EB, 1, truncation=1)
    assert res.certified_length == 0
    assert not res.complete
    assert res.tail_bound == Fraction(3, 2)


def test_finite_series_is_exact():
    res = certified_prefix(SeriesSpec.explicit(10, [1, 1, 1]), 3)
    assert res.exact
    assert res.digits.digits == (1, 2, 2)
    assert res.partial.to_fraction() == Fraction(122, 1000)


def test_alternating_value_and_sign():
    res = certified_prefix(ALT, 64)
    assert res.digits.sign == -1
    s, integer, digits = oracle_digits(2, -1, 64)
    assert (s, integer) == (-1, 0)
    assert list(res.digits.digits[:64]) == digits
    mpmath.mp.dps = 40
    x = mpmath.mpf(-1) / 2
    value = mpmath.nsum(lambda k: x**k / (1 - x**k), [1, mpmath.inf])
    approx = -sum(Fraction(d, 2**i) for i, d in enumerate(res.digits.digits[:64], 1))
    assert abs(mpmath.mpf(approx.numerator) / approx.denominator - value) < mpmath.mpf(2) ** -63


def test_certified_interval_contains_oracle_value():
    for spec, sign in ((EB, 1), (ALT, -1), (SeriesSpec.constant(3, 1), 1)):
        res = certified_prefix_at(spec, 80)
        s, integer, digits = oracle_digits(spec.base, sign, res.certified_length)
        assert res.digits.integer_part == integer
        assert list(res.digits.digits) == digits


def test_monotone_refinement():
    prev = None
    for M in (16, 32, 64, 128, 256):
        cur = certified_prefix_at(EB, M)
        if prev is not None:
            n = prev.certified_length
            assert cur.certified_length >= n
            assert cur.digits.digits[:n] == prev.digits.digits
        prev = cur


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 10), st.lists(st.integers(-4, 4), min_size=1, max_size=30))
def test_finite_series_matches_rational_evaluation(b, coeffs):
    spec = SeriesSpec.explicit(b, coeffs)
    res = certified_prefix(spec, 5)
    d = divisor_sieve(len(coeffs))
    q = sum(Fraction(int(d[n - 1]) * a, b**n) for n, a in enumerate(coeffs, 1))
    assert res.exact and res.partial.to_fraction() == q
    integer, digits = digits_of(q, b, len(coeffs))
    assert res.digits.integer_part == integer
    assert res.digits.padded(len(coeffs)) == tuple(digits)
    assert res.digits.sign == (-1 if q < 0 else 1)


def test_tail_compare_examples():
    assert tail_compare(EB, 1, Fraction(2)).verdict is Verdict.BELOW
    res = tail_compare(EB, 1, Fraction(1, 100))
    assert res.verdict is Verdict.ABOVE
    # threshold above the closed-form bound: no summation needed
    res = tail_compare(SeriesSpec.constant(5, 3), 10, tail_upper_bound(5, 10, 3) * 2)
    assert res.verdict is Verdict.BELOW and res.window == 0


def test_tail_compare_accepts_scaled_thresholds():
    theta = ScaledInteger(2, 1, 1)
    assert tail_compare(EB, 1, theta).verdict is tail_compare(EB, 1, Fraction(1, 2)).verdict


def test_tail_compare_equality_is_unresolved():
    # the tail of a finite series can be hit exactly
    spec = SeriesSpec.explicit(2, [1, 1, 1, 1])
    exact = sum(Fraction(int(d), 2**n) for n, d in zip(range(2, 5), divisor_sieve(4)[1:]))
    res = tail_compare(spec, 1, exact, budget=64)
    assert res.verdict is Verdict.UNRESOLVED


def test_tail_enclosure_contains_summed_tail():
    for spec in (EB, ALT, SeriesSpec.periodic(3, [2, -1])):
        C = 20
        lo, hi = tail_enclosure(spec, C, 32)
        d = divisor_sieve(C + 400)
        s = sum(Fraction(int(d[n - 1]) * abs(spec.coefficient(n)), spec.base**n) for n in range(C + 1, C + 400))
        assert lo <= s * spec.base**C <= hi


def test_tail_bound_soundness_random():
    rnd = random.Random(11)
    for _ in range(40):
        b, M = rnd.randint(2, 10), rnd.randint(0, 30)
        d = divisor_sieve(M + 2000)
        s = sum(Fraction(int(d[n - 1]), b**n) for n in range(M + 1, M + 2001))
        assert s <= tail_upper_bound(b, M, 1)


def test_tail_compare_stable_under_larger_budget():
    rnd = random.Random(5)
    for _ in range(30):
        b = rnd.randint(2, 10)
        spec = SeriesSpec.constant(b, rnd.randint(1, 3))
        C = rnd.randint(1, 10**6)
        theta = Fraction(rnd.randint(1, 40), rnd.randint(1, 40)) / Fraction(b) ** C
        a = tail_compare(spec, C, theta, budget=64)
        z = tail_compare(spec, C, theta, budget=256)
        if a.verdict is not Verdict.UNRESOLVED:
            assert z.verdict is a.verdict


def test_margin_threshold_odd_k():
    t, power = margin_threshold(2, 1, 100, 3)
    assert power == 2 and t == ScaledInteger(2, 1, 203)
    t, power = margin_threshold(10, 3, 7, 4)
    assert power == 1 and t == ScaledInteger(10, 3, 9)


def test_census_desk_plan():
    plan = build_plan(2, 2, 2, 4)
    rep = lemma1_census(plan, EB, 5)
    assert [r.m for r in rep.rows] == list(range(5))
    assert rep.unresolved == 0
    # k = 2: the threshold is only b**-1 below the cutoff; d(C+1)/2 alone beats it usually
    assert rep.exceedances == sum(r.verdict is Verdict.ABOVE for r in rep.rows)
    header, *lines = rep.to_csv().splitlines()
    assert header == "m,cutoff,threshold_num,threshold_den,verdict,window_used"
    m, cutoff, num, den, verdict, window = lines[1].split(",")
    assert int(cutoff) == plan.r + plan.k + plan.A
    assert Fraction(int(gmpy2.mpz(num)), int(gmpy2.mpz(den))) == Fraction(1, 2 ** (plan.r + plan.A + 1))
    assert rep.shape_value().startswith("c*")
    assert len(rep.lemma_thresholds) == 5


def test_census_empty():
    rep = lemma1_census(build_plan(2, 2, 2, 4), EB, 0)
    assert rep.rows == [] and rep.exceedances == 0


def test_census_large_k_is_below():
    # a plan-shaped stand-in with k large enough that b**(k/2) dwarfs any d(n)
    class Plan:
        base, k, r, A = 2, 60, 1000, 1

    rep = lemma1_census(Plan, EB, 20)
    assert all(r.verdict is Verdict.BELOW for r in rep.rows)
