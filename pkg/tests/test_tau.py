import pytest
from mpmath import exp, mpf

from hypmop.mops import factorization
from hypmop.tau import (
    bumped_theta, moment_matrix, tau, tau_assoc, tau_table, tau_values, wronskian_tau,
)
from hypmop.weights import FIXTURES, FX_C, FX_GM, moment_table
from hypmop.numkernel import rel_dev


def test_moment_matrix_layout():
    tab = moment_table(FX_C, 8)
    one = moment_matrix(FX_C, 1, jets=False)
    assert one.rows == [[tab.rho(1, 0)]]
    M = moment_matrix(FX_C, 3, jets=False)
    assert M.rows[1] == [tab.rho(1, 1), tab.rho(2, 1), tab.rho(1, 2)]


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_bi_hankel(name):
    M = moment_matrix(FIXTURES[name], 6, jets=False)
    assert M[2, 0] == M[1, 2] == M[0, 4]
    for r in range(5):
        for m in range(4):
            assert M[r + 1, m] == M[r, m + 2]


def test_tau_values_charlier():
    assert tau(FX_C, 0).value == 1
    t2 = tau(FX_C, 2)
    assert rel_dev(t2.value, -exp(mpf(5) / 6) / 6) < mpf(10) ** -100
    # theta log tau_2 = eta1 + eta2 + 1
    assert rel_dev(t2.theta(1), t2.value * (mpf(1) / 2 + mpf(1) / 3 + 1)) < mpf(10) ** -100


def test_associated_tau():
    assert rel_dev(tau_assoc(FX_C, 1, 1), exp(mpf(1) / 2) / 2) < mpf(10) ** -100
    with pytest.raises(IndexError):
        tau_assoc(FX_C, 3, 4)
    with pytest.raises(IndexError):
        tau_assoc(FX_C, 3, 0)
    assert tau_assoc(FX_C, 3, 4, boundary_zero=True) == 0


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_associated_tau_is_theta_of_tau(name):
    fam = FIXTURES[name]
    jets = tau_table(fam, 6)
    for n in range(1, 7):
        assert rel_dev(tau_assoc(fam, n, 1), jets[n].theta(1)) < mpf(10) ** -40


def test_wronskian_small_cases():
    tab = moment_table(FX_C, 4)
    assert wronskian_tau(FX_C, 0) == 1
    assert rel_dev(wronskian_tau(FX_C, 1), tab.rho(1, 0)) < mpf(10) ** -100
    assert rel_dev(wronskian_tau(FX_C, 2), -exp(mpf(5) / 6) / 6) < mpf(10) ** -100


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_wronskian_equals_minor(name):
    fam = FIXTURES[name]
    vals = tau_values(fam, 8)
    for n in range(1, 9):
        assert rel_dev(wronskian_tau(fam, n), vals[n]) < mpf(10) ** -50


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_pivots_and_first_coefficient_from_tau(name):
    fam = FIXTURES[name]
    vals = tau_values(fam, 9)
    jets = tau_table(fam, 9)
    f = factorization(fam, 9)
    for n in range(1, 9):
        assert rel_dev(f.H[n], vals[n + 1] / vals[n]) < mpf(10) ** -40
        assert rel_dev(f.S[n, n - 1], -jets[n].theta(1) / jets[n].value) < mpf(10) ** -40


def test_jets_match_bumped_determinants():
    for fam in (FX_C, FX_GM):
        jets = tau_table(fam, 6)
        for n in range(1, 7):
            for k in (1, 2, 3):
                assert rel_dev(jets[n].theta(k), bumped_theta(fam, n, k)) < mpf(10) ** -40
