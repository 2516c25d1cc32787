from fractions import Fraction

import pytest
from mpmath import exp, hyp1f1, mpf

from hypmop.weights import (
    FIXTURES, FX_C, FX_GM, FamilyError, WeightFamily, gen_meixner2, moment, moment_table, pearson_residual,
    pfq_eval, pochhammer, rational, shift_datum, shift_params, weight_eval,
)


def close(x, y, tol=mpf(10) ** -70):
    return abs(x - y) <= tol * max(1, abs(y))


def test_pochhammer():
    assert pochhammer(mpf("0.3"), 0) == 1
    assert pochhammer(1, 4) == 24
    assert close(pochhammer(Fraction(1, 2), 3), mpf(15) / 8)


def test_pfq_values():
    v, tail = pfq_eval((), (), Fraction(1, 2))
    assert close(v, exp(mpf(1) / 2))
    assert tail < mpf(10) ** -150
    assert close(pfq_eval((2,), (), Fraction(1, 3))[0], mpf(9) / 4)
    assert close(pfq_eval((1,), (2,), Fraction(1, 2))[0], 2 * (exp(mpf(1) / 2) - 1))


def test_weight_values():
    assert close(weight_eval(FX_C, 1, 3), mpf(1) / 48)
    assert close(weight_eval(FX_GM, 2, 2), mpf(3) / 280)
    for fam in FIXTURES.values():
        assert weight_eval(fam, 1, 0) == 1 and weight_eval(fam, 2, 0) == 1


def test_moments_and_theta_slot():
    r0 = moment(FX_C, 1, 0)
    assert close(r0.value, exp(mpf(1) / 2))
    assert close(moment(FX_C, 1, 1).value, exp(mpf(1) / 2) / 2)
    for fam in FIXTURES.values():
        for a in (1, 2):
            assert close(moment(fam, a, 0).value, pfq_eval(fam.b(a), fam.c, fam.eta(a))[0])
            lo, hi = moment(fam, a, 2), moment(fam, a, 3)
            slot = (1, 0) if a == 1 else (0, 1)
            assert close(hi.value, lo.d(*slot))
            other = (0, 1) if a == 1 else (1, 0)
            assert lo.d(*other) == 0


def test_moment_table_matches_termwise_moments():
    tab = moment_table(FX_GM, 6)
    for a in (1, 2):
        for n in range(6):
            assert close(tab.rho(a, n), moment(FX_GM, a, n).value)


def test_pearson_equation():
    assert pearson_residual(FX_C, 1, 0) == 0
    assert abs(pearson_residual(FX_GM, 2, 3)) < mpf(10) ** -100
    for fam in FIXTURES.values():
        for a in (1, 2):
            for k in list(range(41)) + [50]:
                scale = weight_eval(fam, a, k) * max(1, k) ** 2
                assert abs(pearson_residual(fam, a, k)) <= mpf(10) ** -100 * scale


def test_shared_eta_on_the_diagonal():
    fam = WeightFamily((), (1,), (1,), Fraction(1, 2), Fraction(1, 2))
    for k in range(10):
        assert weight_eval(fam, 1, k) == weight_eval(fam, 2, k)


def test_shifts():
    assert shift_params(FX_GM, "b1+1").b1 == (2,)
    assert shift_params(FX_GM, "c-1").c == (Fraction(3, 2),)
    # c as stored is the Pearson root; the named parameter c = 3/2 becomes 1/2
    assert shift_params(FX_GM, "c-1").c[0] - 1 == Fraction(1, 2)
    assert shift_datum(FX_GM, "c-1") == Fraction(3, 2)
    assert shift_datum(FX_GM, "b2+1") == Fraction(1, 2)
    with pytest.raises(FamilyError, match="no b parameters"):
        shift_params(FX_C, "b1+1")
    with pytest.raises(FamilyError):
        shift_params(FX_GM, "b1+1", index=3)


def test_guards():
    with pytest.raises(FamilyError):
        WeightFamily((), (1, 2), (), Fraction(1, 2), Fraction(1, 3))
    with pytest.raises(FamilyError):
        WeightFamily((), (1,), (1,), Fraction(3, 2), Fraction(1, 3))
    with pytest.raises(FamilyError):
        WeightFamily((0,), (), (), Fraction(1, 2), Fraction(1, 3))
    with pytest.raises(FamilyError):
        WeightFamily((), (), (), Fraction(-1, 2), Fraction(1, 3))
    # lowering c = 1 lands on the pole c = 0
    with pytest.raises(FamilyError):
        shift_params(WeightFamily((1,), (), ()), "c-1")


def test_rational_parsing():
    assert rational("1/3") == Fraction(1, 3)
    assert rational("0.25") == Fraction(1, 4)
    assert rational(2) == 2
    for bad in ("1//2", "/2", "a", "1/0"):
        with pytest.raises(FamilyError):
            rational(bad)


def test_at_pattern_flags():
    assert FIXTURES["FX-C"].at_pattern == "distinct-eta"
    assert FIXTURES["FX-M"].at_pattern == "distinct-b"
    assert FIXTURES["FX-GM"].at_pattern == "distinct-b"
    assert WeightFamily((), (1,), (2,), Fraction(1, 2), Fraction(1, 3)).at_pattern == "unverified"


def test_generalized_c_parameter():
    # theta(z) = z(z + c) for the named c
    fam = gen_meixner2(c=Fraction(3, 2))
    assert fam.theta_coeffs() == [0, Fraction(3, 2), 1]
    assert close(moment(fam, 1, 0).value, hyp1f1(1, mpf(5) / 2, mpf(1) / 2))
