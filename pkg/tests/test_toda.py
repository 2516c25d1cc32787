import pytest
from mpmath import mpf

from hypmop.numkernel import rel_dev
from hypmop.tau import tau_table
from hypmop.toda import (
    TAU_PDE_SIGNS, abc_toda_residual, compat_II_residual, finite_difference_theta, jet_derivatives,
    lax_residual, single_weight_toda_residual, tau_coefficient_residuals, tau_pde_residual, theta_flow,
    theta_coefficient_identities, toda2_residual,
)
from hypmop.weights import FIXTURES, FX_C, FX_GC, FX_GM

FLOW = mpf(10) ** -35
PDE = mpf(10) ** -30
NAMES = sorted(FIXTURES)


@pytest.mark.parametrize("name", NAMES)
def test_wave_matrix_structure(name):
    flow = theta_flow(FIXTURES[name], 10)
    assert len(flow.invariants) == 8
    for label, r in flow.invariants.items():
        assert r < FLOW, label


@pytest.mark.parametrize("name", NAMES)
def test_coefficients_from_wave_data(name):
    res = theta_coefficient_identities(FIXTURES[name], 10)
    assert max(res.values()) < FLOW


@pytest.mark.parametrize("name", NAMES)
def test_coefficients_from_tau(name):
    res = tau_coefficient_residuals(FIXTURES[name], 8)
    assert ("gamma", 2) in res and ("beta", 1) in res and ("alpha", 0) in res
    assert max(res.values()) < FLOW


@pytest.mark.parametrize("name", NAMES)
def test_two_component_toda(name):
    res = toda2_residual(FIXTURES[name], range(7))
    assert len(res) == 14
    assert max(res.values()) < PDE


@pytest.mark.parametrize("name", NAMES)
def test_third_order_tau_equation(name):
    for n in range(7):
        assert tau_pde_residual(FIXTURES[name], n) < PDE


def test_third_order_equation_sign_matters():
    # the other sign of the last factor is far from an identity once n >= 1
    assert TAU_PDE_SIGNS == (1, -1)
    assert tau_pde_residual(FX_C, 0, sign=-1) < PDE
    for n in (1, 2, 3):
        assert tau_pde_residual(FX_C, n, sign=-1) > mpf(10) ** -3
        assert tau_pde_residual(FX_GM, n, sign=-1) > mpf(10) ** -3


@pytest.mark.parametrize("name", NAMES)
def test_single_weight_toda(name):
    for n in range(6):
        assert single_weight_toda_residual(FIXTURES[name], n) < PDE


@pytest.mark.parametrize("name", NAMES)
def test_alpha_beta_gamma_system(name):
    res = abc_toda_residual(FIXTURES[name], range(9))
    assert len(res) == 27
    assert max(res.values()) < FLOW


@pytest.mark.parametrize("name", NAMES)
def test_lax_pair(name):
    res = lax_residual(FIXTURES[name], 10)
    assert max(res.values()) < FLOW


@pytest.mark.parametrize("name", NAMES)
def test_compatibility_II(name):
    res = compat_II_residual(FIXTURES[name], 10)
    for key in ("theta Psi = [phi, Psi]", "theta Psi^T = Psi^T + [mu, Psi^T]", "[phi, Psi] = [Psi, T-]",
                "band excess"):
        assert res[key] < FLOW, key
    assert min(res["windows"]) >= 4


def test_compatibility_II_on_the_named_fixtures():
    for fam in (FX_C, FX_GC):
        res = compat_II_residual(fam, 8)
        assert res["theta Psi = [phi, Psi]"] < FLOW
        assert res["theta Psi^T = Psi^T + [mu, Psi^T]"] < FLOW


@pytest.mark.parametrize("fam", [FX_C, FX_GM])
def test_finite_differences_agree_with_jets(fam):
    for n in (1, 3):
        fd = finite_difference_theta(fam, n)
        assert rel_dev(fd, tau_table(fam, n)[n].theta(1)) < mpf(10) ** -30
    d = jet_derivatives(fam, 3)
    assert len(d) == 3 and d[0] == tau_table(fam, 3)[3].theta(1)
