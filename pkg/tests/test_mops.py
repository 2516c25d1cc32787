import pytest
from mpmath import exp, mpf

from hypmop.mops import (
    coefficient_expressions, deg_typeI, factorization, orthogonality_residuals, partial_pascal, pascal,
    pascal_shift_residuals, recurrence_residual, recursion_coeffs, typeI, typeI_normalization, typeII,
)
from hypmop.numkernel import parity_identity, rel_dev
from hypmop.weights import FIXTURES, FX_C, FX_GM, FX_M

TIGHT = mpf(10) ** -40


def test_type_II_small_cases():
    assert typeII(FX_C, 0).coeffs == [1]
    b1 = typeII(FX_C, 1)
    assert rel_dev(b1.coeffs[0], mpf(-1) / 2) < TIGHT and b1.coeffs[1] == 1


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_type_II_monic_and_matches_factorization(name):
    fam = FIXTURES[name]
    f = factorization(fam, 10)
    for n in range(1, 10):
        B = typeII(fam, n)
        assert B.coeffs[n] == 1 and B.degree() == n
        assert max(rel_dev(x, y) for x, y in zip(B.coeffs, f.B(n).coeffs)) < TIGHT


def test_type_I_small_cases():
    A1 = typeI(FX_C, 1, 0)
    assert rel_dev(A1.coeffs[0], exp(mpf(-1) / 2)) < TIGHT
    assert typeI(FX_C, 2, 0).coeffs == []
    assert deg_typeI(4, 1) == 2 and deg_typeI(4, 2) == 1


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_type_I_degrees_and_determinant_form(name):
    fam = FIXTURES[name]
    f = factorization(fam, 11)
    for n in range(1, 11):
        for a in (1, 2):
            A = f.A(a, n)
            assert A.degree() == deg_typeI(n, a) == -(-(n + 2 - a) // 2) - 1
            if n <= 7:
                det = typeI(fam, a, n)
                assert max([rel_dev(x, y) for x, y in zip(det.coeffs, A.coeffs)] + [0]) < TIGHT


def test_recursion_spot_values():
    rc = recursion_coeffs(FX_C, 4)
    assert rel_dev(rc.alpha[0], mpf(1) / 2) < TIGHT
    assert rel_dev(rc.alpha[1], mpf(4) / 3) < TIGHT
    assert rel_dev(rc.gamma[2], mpf(1) / 12) < TIGHT
    assert rc.beta[0] == 0 and rc.gamma[0] == rc.gamma[1] == 0
    rm = recursion_coeffs(FX_M, 4)
    assert rel_dev(rm.alpha[1], mpf(5) / 2) < TIGHT
    assert rel_dev(rm.beta[2], 5) < TIGHT
    assert rel_dev(rm.gamma[2], 3) < TIGHT
    assert rel_dev(rm.gamma[3], mpf(1) / 2) < TIGHT


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_gamma_is_pivot_ratio(name):
    fam = FIXTURES[name]
    rc = recursion_coeffs(fam, 8)
    f = factorization(fam, 10)
    for n in range(2, 9):
        assert rel_dev(rc.gamma[n], f.H[n] / f.H[n - 2]) < TIGHT


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_orthogonality(name):
    fam = FIXTURES[name]
    assert orthogonality_residuals(fam, 0) == {}
    for n in range(1, 9):
        res = orthogonality_residuals(fam, n)
        assert res and max(res.values()) < TIGHT
        assert abs(typeI_normalization(fam, n) - 1) < TIGHT


def test_orthogonality_counts():
    res = orthogonality_residuals(FX_GM, 3)
    # m <= deg A^(a)_2 for the type II side, m < 3 for the type I side
    assert sorted(k for k in res if k[0] == "II") == [("II", 1, 0), ("II", 1, 1), ("II", 2, 0)]
    assert sorted(k for k in res if k[0] == "I") == [("I", 0, 0), ("I", 0, 1), ("I", 0, 2)]


def test_recurrence():
    assert recurrence_residual(FX_C, 0, (0, 1, 2)) < TIGHT
    assert recurrence_residual(FX_C, 4, range(7)) < TIGHT
    assert recurrence_residual(FX_GM, 6, (-1, 0.5, 3)) < TIGHT


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_coefficient_expressions_agree(name):
    fam = FIXTURES[name]
    expr = coefficient_expressions(fam, 8)
    rc = recursion_coeffs(fam, 10)
    ref = {"alpha": rc.alpha, "beta": rc.beta[1:], "gamma": rc.gamma[2:]}
    for key, forms in expr.items():
        for label, seq in forms.items():
            assert len(seq) == 9
            assert max(rel_dev(x, y) for x, y in zip(seq, ref[key])) < TIGHT, (key, label)


def test_pascal_matrices():
    L = pascal(5)
    assert L.rows[4] == [1, 4, 6, 4, 1]
    prod = partial_pascal(10, 1) @ partial_pascal(10, 1, -1)
    assert (prod - parity_identity(10, 1)).max_abs() == 0
    assert (pascal(6) @ pascal(6, -1) - parity_identity(6, 1) - parity_identity(6, 2)).max_abs() == 0


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_pascal_shifts(name):
    res = pascal_shift_residuals(FIXTURES[name], 7)
    assert set(res) >= {"B(z+1)", "B(z-1)", "A1(z+1)", "A2(z-1)", "L1 L-1"}
    assert max(res.values()) < TIGHT
