import random
from fractions import Fraction

import numpy as np
import pytest

from divseries.analysis import (
    PrefixTooShort,
    find_zero_runs,
    formula_run_length,
    nominal_margin,
    periodicity_scan,
    predict_run_window,
    recheck,
    run_length_from_margin,
)
from divseries.construction import CLAIMED_STRENGTH, PAPER_FAITHFUL, CrtPlan, M0Certificate, build_plan, find_m0
from divseries.digits import DigitString
from divseries.series import SeriesSpec, certified_prefix, certified_prefix_at

from oracles import digits_of, oracle_digits, zero_runs_brute


def ds(digits, integer=0, base=2):
    return DigitString(base, 1, integer, tuple(digits))


def fake_cert(k=40, j0=2, r=100, margin=None):
    plan = CrtPlan(2, k, j0, k + 1, tuple(() for _ in range(k)), CLAIMED_STRENGTH, 1, r)
    return M0Certificate(plan, 0, r + j0, "prime", (0, 0), "structural", "strict", "below", margin)


def synthetic_digits(P0, n_star, guaranteed, length):
    """U + 2/2**n* + T with U a multiple of 2**-P0 and T just under 2**(-n*-L)."""
    rnd = random.Random(P0)
    U = Fraction(rnd.getrandbits(P0) | 1, 2**P0)
    L = guaranteed - 1  # v_2(2) = 1
    T = Fraction(1, 2 ** (n_star + L)) - Fraction(1, 2 ** (n_star + L + 60))
    x = U + Fraction(2, 2**n_star) + T
    integer, digits = digits_of(x, 2, length)
    return ds(digits, integer)


def test_zero_run_examples():
    assert [(r.start, r.length, r.preceded_by_nonzero) for r in find_zero_runs(ds([1, 0, 0, 0, 1]), 2)] == [(2, 3, True)]
    runs = find_zero_runs(ds([0, 0, 1]), 1)
    assert [(r.start, r.length, r.preceded_by_nonzero) for r in runs] == [(1, 2, False)]
    runs = find_zero_runs(ds([0, 0, 1], integer=3), 1)
    assert runs[0].preceded_by_nonzero
    # base 10: integer part 10 ends in the digit 0
    assert not find_zero_runs(DigitString(10, 1, 10, (0, 5)), 1)[0].preceded_by_nonzero
    with pytest.raises(ValueError):
        find_zero_runs(ds([1]), 0)


def test_runs_touching_the_boundary_are_flagged():
    runs = find_zero_runs(ds([1, 0, 0]), 1)
    assert runs[0].within_certified is False
    runs = find_zero_runs(ds([1, 0, 0, 1, 0, 0]), 1, certified_length=4)
    assert [(r.start, r.length, r.within_certified) for r in runs] == [(2, 2, True)]


def test_exact_expansions_have_no_boundary():
    res = certified_prefix(SeriesSpec.explicit(10, [1, 1, 1]), 3)
    runs = find_zero_runs(res, 1)
    assert runs == []


def test_zero_runs_against_brute_force():
    rnd = random.Random(8)
    for _ in range(2000):
        n = rnd.randint(1, 40)
        digits = [rnd.choice([0, 0, 0, 1, 2]) for _ in range(n)]
        integer = rnd.randint(0, 3)
        base = 3
        m = rnd.randint(1, 3)
        got = [(r.start, r.length, r.preceded_by_nonzero, r.within_certified)
               for r in find_zero_runs(DigitString(base, 1, integer, tuple(digits)), m)]
        assert got == zero_runs_brute(digits, integer % base != 0, m)


def test_erdos_borwein_runs_match_oracle():
    res = certified_prefix(SeriesSpec.constant(2, 1), 128)
    _, integer, digits = oracle_digits(2, 1, res.certified_length)
    got = [(r.start, r.length, r.preceded_by_nonzero, r.within_certified) for r in find_zero_runs(res, 1)]
    assert got == zero_runs_brute(digits, integer % 2 != 0, 1)


def test_run_length_helpers():
    assert formula_run_length(40, 2, 1) == 18
    assert formula_run_length(2, 2, 1) <= 0
    assert nominal_margin(2, 1, 2, 40) == Fraction(1, 2**18)
    assert run_length_from_margin(2, Fraction(1, 2**18)) == 17
    assert run_length_from_margin(2, Fraction(1)) == -1
    assert run_length_from_margin(10, Fraction(1, 1000)) == 2
    # odd k: sqrt(b) is rounded up
    assert nominal_margin(4, 1, 0, 3) == Fraction(1, 16) * 2


def test_desk_prediction_is_vacuous():
    plan = build_plan(2, 2, 2, 4)
    cert = find_m0(plan, SeriesSpec.constant(2, 1), 100)
    pred = predict_run_window(cert, SeriesSpec.constant(2, 1), strict=False)
    assert pred.status == "vacuous" and pred.guaranteed_run_length == 0
    P0 = plan.r + cert.m0 * plan.A
    assert pred.nonzero_window == (P0, P0 + 2)


def test_strict_prediction_requires_margin():
    cert = fake_cert()
    with pytest.raises(ValueError):
        predict_run_window(cert, SeriesSpec.constant(2, 1))


@pytest.mark.parametrize("certified", [True, False])
def test_synthetic_k40_prediction(certified):
    margin = Fraction(1, 2**18) if certified else None
    cert = fake_cert(margin=margin)
    pred = predict_run_window(cert, SeriesSpec.constant(2, 1), strict=certified)
    assert pred.status == ("certified" if certified else "heuristic")
    assert pred.guaranteed_run_length == 18 == formula_run_length(40, 2, 1)
    digits = synthetic_digits(100, cert.n_star, pred.guaranteed_run_length, 200)
    runs = [r for r in find_zero_runs(digits, pred.guaranteed_run_length) if pred.contains(r)]
    assert runs and runs[0].length >= 18 and runs[0].preceded_by_nonzero


def test_mixed_signs_downgrade_prediction():
    cert = fake_cert(margin=Fraction(1, 2**18))
    pred = predict_run_window(cert, SeriesSpec.alternating(2))
    assert pred.status == "heuristic" and "mixed-sign" in pred.note


def test_prediction_holds_on_real_series():
    # b=10, faithful mode, k=2: A = 1, r = 0, the prime is n* = m0 + 1
    plan = build_plan(10, 2, 1, 3, PAPER_FAITHFUL)
    spec = SeriesSpec.constant(10, 1)
    cert = find_m0(plan, spec, 20, "strict")
    pred = predict_run_window(cert, spec)
    res = certified_prefix(spec, 40)
    if pred.guaranteed_run_length > 0:
        assert any(pred.contains(r) and r.length >= pred.guaranteed_run_length
                   for r in find_zero_runs(res, 1))
    else:
        assert pred.status == "vacuous"


def test_periodicity_examples():
    third = DigitString(10, 1, 0, (3,) * 40)
    v = periodicity_scan(third, 3, 4)
    assert (0, 1) in v.survivors
    pattern = ([1, 0, 1] * 20)[:48]
    v = periodicity_scan(ds(pattern), 2, 6)
    assert {(0, 3), (1, 3), (2, 3), (0, 6)} <= set(v.survivors)
    assert recheck(v, ds(pattern))
    assert v.to_json().startswith('{"L": 48')


def test_periodicity_closure_and_witnesses():
    rnd = random.Random(4)
    for _ in range(50):
        d = [rnd.randint(0, 1) for _ in range(rnd.randint(20, 60))]
        v = periodicity_scan(np.array(d), 5, 6)
        assert recheck(v, np.array(d))
        for s, p in v.survivors:
            assert all((t, p) in v.survivors for t in range(s, 6))


def test_periodicity_too_short():
    with pytest.raises(PrefixTooShort) as info:
        periodicity_scan(ds([1, 0] * 5), 4, 4)
    assert info.value.needed == 12
    res = certified_prefix_at(SeriesSpec.constant(2, 1), 40)
    with pytest.raises(PrefixTooShort):
        periodicity_scan(res, 64, 64, length=256)


def test_erdos_borwein_is_not_periodic():
    res = certified_prefix(SeriesSpec.constant(2, 1), 256)
    v = periodicity_scan(res, 64, 64, length=256)
    assert v.rejected_all and "no rational" in v.summary()
    assert recheck(v, res)


def test_rational_control_survives():
    res = certified_prefix(SeriesSpec.explicit(2, [1, 0, 1, 1]), 4)
    v = periodicity_scan(res, 8, 4)
    assert (4, 1) in v.survivors
