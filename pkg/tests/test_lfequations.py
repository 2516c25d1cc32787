import pytest
from mpmath import mpf

from hypmop.lfequations import (
    charlier_closed, family_kind, forward_recursion, gen_charlier_identities, gen_meixner2_superdiagonal,
    lf_consistency, meixner2_closed, one_step_predictions, recursion_params,
)
from hypmop.mops import recursion_coeffs
from hypmop.numkernel import rel_dev
from hypmop.weights import FIXTURES, FX_GC, FX_GM, FX_M, WeightFamily


def test_family_classification():
    assert [family_kind(FIXTURES[k]) for k in ("FX-C", "FX-M", "FX-GC", "FX-GM")] == [
        "charlier", "meixner2", "gen-charlier", "gen-meixner2"]
    assert family_kind(WeightFamily((), (1,), (2,), "1/2", "1/3")) is None
    # the recursions use the named c, one less than the stored Pearson root
    assert recursion_params(FX_GM)[1]["c"] == mpf(3) / 2


def test_charlier_closed_values():
    a, b, g = charlier_closed(mpf(1) / 2, mpf(1) / 3, mpf(1) / 2, 4)
    assert b[0] == 0 and g[1] == 0
    assert abs(b[3] - mpf(4) / 3) < mpf(10) ** -70
    assert abs(g[3] + mpf(1) / 18) < mpf(10) ** -70
    assert abs(g[2] - mpf(1) / 12) < mpf(10) ** -70


def test_meixner_closed_values():
    a, b, g = meixner2_closed(mpf(1) / 2, 1, mpf(1) / 2, 4)
    assert abs(a[1] - mpf(5) / 2) < mpf(10) ** -70
    assert abs(b[2] - 5) < mpf(10) ** -70
    assert abs(b[3] - 13) < mpf(10) ** -70
    assert abs(g[2] - 3) < mpf(10) ** -70
    assert abs(g[3] - mpf(1) / 2) < mpf(10) ** -70


@pytest.mark.parametrize("fam", [FIXTURES["FX-C"], FX_M])
def test_closed_forms_match_factorization(fam):
    rep = lf_consistency(fam, 10)
    assert rep.method == "closed form"
    assert len(rep.deviations) == 11 + 10 + 9
    assert rep.max_deviation() < mpf(10) ** -40


@pytest.mark.parametrize("fam", [FX_GC, FX_GM])
def test_recursions_match_factorization(fam):
    rep = lf_consistency(fam, 10)
    assert rep.method.startswith("forward recursion from n=0")
    assert not rep.notes
    assert rep.max_deviation() < mpf(10) ** -35


def test_one_step_predictions():
    for fam in (FX_GC, FX_GM):
        preds, rec = one_step_predictions(fam, 10)
        for n, (a2, b2, g2) in preds.items():
            assert rel_dev(a2, rec.alpha[n + 2]) < mpf(10) ** -35
            assert rel_dev(b2, rec.beta[n + 2]) < mpf(10) ** -35
            assert rel_dev(g2, rec.gamma[n + 2]) < mpf(10) ** -35


def test_literal_meixner_variant_does_not_hold():
    rep = lf_consistency(FX_GM, 10, variant="literal")
    assert rep.max_deviation() > 1
    assert rep.notes  # the n = 0 fallback is recorded
    preds, rec = one_step_predictions(FX_GM, 6, variant="literal")
    assert any(rel_dev(p[0], rec.alpha[n + 2]) > mpf(10) ** -3 for n, p in preds.items())


def test_unknown_variant_rejected():
    with pytest.raises(ValueError):
        forward_recursion(FX_GM, 6, variant="other")


def test_charlier_elementwise_identities():
    rc = recursion_coeffs(FX_GC, 12)
    for n in range(9):
        res = gen_charlier_identities(rc.alpha, rc.beta, rc.gamma, mpf(1) / 2, mpf(1) / 3, mpf(1) / 2, n)
        assert max(abs(r) for r in res) < mpf(10) ** -35


def test_meixner_superdiagonal_identity():
    rc = recursion_coeffs(FX_GM, 12)
    for n in range(9):
        r = gen_meixner2_superdiagonal(rc.alpha, rc.beta, mpf(1) / 2, 1, mpf(1) / 2, mpf(3) / 2, n)
        assert abs(r) < mpf(10) ** -35


def test_no_equations_for_other_families():
    with pytest.raises(ValueError, match="no Laguerre-Freud"):
        lf_consistency(WeightFamily((), (1,), (3,), "1/2", "1/3"), 4)
