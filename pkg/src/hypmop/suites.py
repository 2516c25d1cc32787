"""Check registry: every identity the package verifies, grouped into suites.

A check yields records (check id, identity name, site, residual, tolerance
class). Tolerances are looked up by class so they can be overridden per run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from mpmath import mpf

from . import lattice, lfequations, lfmatrix, mops, tau, toda, weights
from .numkernel import rel_dev, value_of

TOLERANCES = {
    "exact": mpf(10) ** -40,
    "wronskian": mpf(10) ** -50,
    "recursion": mpf(10) ** -35,
    "flow": mpf(10) ** -35,
    "pde": mpf(10) ** -30,
    "lattice": mpf(10) ** -30,
    "matrix": mpf(10) ** -35,
    "finite-difference": mpf(10) ** -30,
}

SUITES = ("moments", "tau", "coeffs", "lf", "toda", "lattice")


@dataclass
class Record:
    suite: str
    check: str
    anchor: str
    site: str
    residual: object
    tol_class: str
    tolerance: object = None
    passed: bool = None
    seconds: float = 0.0


def clear_caches():
    tau.clear_caches()
    mops._FCACHE.clear()
    lattice._FIELDS.clear()


class _Collector:
    def __init__(self, suite):
        self.suite = suite
        self.records = []
        self.clock = time.perf_counter()

    def add(self, check, anchor, site, residual, tol_class):
        # wall time since the previous record, which is where the work happened
        now = time.perf_counter()
        self.records.append(Record(self.suite, check, anchor, str(site), residual, tol_class,
                                   seconds=now - self.clock))
        self.clock = now


def _has(family, letter):
    """Whether the shift exists and lands on a valid family."""
    try:
        lattice.apply_shifts(family, letter)
    except weights.FamilyError:
        return False
    return True


def suite_moments(family, n_max, out):
    for a in (1, 2):
        for k in range(n_max + 1):
            r = weights.pearson_residual(family, a, k)
            scale = abs(weights.poly_eval(family.sigma_coeffs(a), mpf(k)) * weights.weight_eval(family, a, k))
            out.add("pearson", "theta(k+1) w(k+1) = sigma(k) w(k)", f"a={a} k={k}",
                    abs(r) / max(scale, mpf(10) ** -300), "exact")
        tab = weights.moment_table(family, n_max)
        closed, _ = weights.pfq_eval(family.b(a), family.c, family.eta(a))
        out.add("rho0-pfq", "rho_0 = pFq(b; c; eta)", f"a={a}", rel_dev(tab.rho(a, 0), closed), "exact")
        derivs = tau.theta_powers_pfq(family.b(a), family.c, family.eta(a), n_max)
        for n in range(n_max + 1):
            out.add("rho-theta-pfq", "rho_n = theta^n pFq", f"a={a} n={n}", rel_dev(tab.rho(a, n), derivs[n]), "exact")


def suite_tau(family, n_max, out):
    vals = tau.tau_values(family, n_max + 1)
    jets = tau.tau_table(family, n_max + 1)
    fz = mops.factorization(family, n_max + 1)
    for n in range(1, n_max + 1):
        out.add("wronskian", "tau_n double Wronskian = leading minor", f"n={n}",
                rel_dev(tau.wronskian_tau(family, n), vals[n]), "wronskian")
        out.add("H-ratio", "H_n = tau_{n+1}/tau_n", f"n={n}", rel_dev(value_of(fz.H[n]), vals[n + 1] / vals[n]), "exact")
        p1 = -jets[n].theta(1) / jets[n].value
        out.add("p1-log", "p^1_n = -theta log tau_n", f"n={n}", rel_dev(fz.S[n, n - 1], p1), "exact")
        out.add("tau1-theta", "tau^1_n = theta tau_n", f"n={n}",
                rel_dev(tau.tau_assoc(family, n, 1), jets[n].theta(1)), "exact")
        if n <= 6:
            for k in (1, 2, 3):
                out.add("jet-bump", "theta^k tau_n: jets = bumped determinants", f"n={n} k={k}",
                        rel_dev(jets[n].theta(k), tau.bumped_theta(family, n, k)), "exact")
    fd = toda.finite_difference_theta(family, min(n_max, 4))
    out.add("finite-difference", "theta tau_n: jets = central difference", f"n={min(n_max, 4)}",
            rel_dev(fd, jets[min(n_max, 4)].theta(1)), "finite-difference")


def suite_coeffs(family, n_max, out):
    for n in range(1, n_max + 1):
        res = mops.orthogonality_residuals(family, n)
        out.add("orthogonality-II", "sum_k B_n(k) k^m w_a(k) = 0", f"n={n}",
                max(v for k, v in res.items() if k[0] == "II"), "exact")
        out.add("orthogonality-I", "sum_a sum_k A_n^(a)(k) k^m w_a(k) = 0", f"n={n}",
                max(v for k, v in res.items() if k[0] == "I"), "exact")
        out.add("typeI-normalization", "sum_a sum_k A_n^(a)(k) k^n w_a(k) = 1", f"n={n}",
                abs(mops.typeI_normalization(family, n) - 1), "exact")
        out.add("recurrence", "z B_n = B_{n+1} + alpha_n B_n + beta_n B_{n-1} + gamma_n B_{n-2}", f"n={n}",
                mops.recurrence_residual(family, n, (-1, 2, 5)), "exact")
        fz = mops.factorization(family, n + 2)
        det_B = mops.typeII(family, n)
        out.add("typeII-det", "B_n from associated taus = row of S", f"n={n}",
                max(rel_dev(x, y) for x, y in zip(det_B.coeffs, fz.B(n).coeffs)), "exact")
        for a in (1, 2):
            det_A = mops.typeI(family, a, n)
            fac_A = fz.A(a, n)
            out.add("typeI-det", "A_n^(a) from bordered determinant = row of H^-1 S~", f"n={n} a={a}",
                    max([rel_dev(x, y) for x, y in zip(det_A.coeffs, fac_A.coeffs)] + [mpf(0)]), "exact")
    expr = mops.coefficient_expressions(family, n_max)
    rec = mops.recursion_coeffs(family, n_max + 2)
    ref = {"alpha": rec.alpha, "beta": rec.beta[1:], "gamma": rec.gamma[2:]}
    for name, forms in expr.items():
        for label, seq in forms.items():
            dev = max(rel_dev(x, y) for x, y in zip(seq, ref[name]))
            out.add("coefficient-expression", f"{name} = {label}", f"n<={n_max}", dev, "exact")
    for label, r in mops.pascal_shift_residuals(family, n_max + 1).items():
        out.add("pascal", f"{label} via dressed Pascal matrix", f"size={n_max + 1}", r, "exact")


def suite_lf(family, n_max, out):
    kind = lfequations.family_kind(family)
    if kind is not None:
        rep = lfequations.lf_consistency(family, n_max)
        lo = 0 if kind in ("charlier", "meixner2") else 3
        what = "closed form" if lo == 0 else "Laguerre-Freud recursion"
        for (name, n), d in sorted(rep.deviations.items()):
            if n >= lo:
                out.add(f"lf-{name}", f"{name}_n: {what} = factorization", f"n={n}", d,
                        "exact" if lo == 0 else "recursion")
    size = max(n_max, 6) + 2
    psi = lfmatrix.lf_matrix(family, size)
    dual = lfmatrix.lf_matrix_dual(family, size)
    scale = max(mpf(1), psi.matrix.max_abs())
    out.add("lf-dual", "Pi^-1 theta(T) = sum_a sigma_a(T_a^T) Pi_a^T", f"size={size}",
            lfmatrix.window_diff(psi.matrix, dual.matrix) / scale, "exact")
    out.add("lf-band", "Psi has lower bandwidth 2M and upper bandwidth deg theta", f"size={size}",
            psi.band_excess() / scale, "exact")
    out.add("compat-I", "[Psi, T] = Psi", f"size={size}", lfmatrix.compat_I_residual(family, size) / scale, "flow")
    if kind == "charlier":
        ref = lfmatrix.charlier_psi(family, size)
        out.add("charlier-psi", "Psi = eta1 I1 + eta2 I2 + Lambda", f"size={size}",
                lfmatrix.window_diff(psi.matrix, ref), "exact")
    kinds = [k for k, letter in (("b1+1", "h"), ("b2+1", "c"), ("c-1", "t")) if _has(family, letter)]
    for k in kinds:
        out.add("contiguity", f"moment matrix contiguity ({k})", f"size={size}",
                lfmatrix.moment_contiguity_residuals(family, size, k), "exact")
        cd = lfmatrix.connection_matrices(family, k, size)
        for label, r in cd.structure_residuals().items():
            out.add("connection-structure", f"{label} ({k})", f"size={size}", r, "exact")
        res = lfmatrix.connection_formula_residuals(family, k, size, (2, 5))
        for (label, z), r in sorted(res.items()):
            out.add("connection-formula", f"{label} ({k})", f"z={z}", r, "exact")


def suite_toda(family, n_max, out):
    size = max(n_max, 6) + 2
    flow = toda.theta_flow(family, size)
    for label, r in flow.invariants.items():
        out.add("theta-flow", label, f"size={size}", r, "flow")
    for label, r in toda.theta_coefficient_identities(family, size).items():
        out.add("theta-coefficients", label, f"size={size}", r, "flow")
    for (name, n), r in sorted(toda.tau_coefficient_residuals(family, n_max).items()):
        out.add("tau-coefficients", {"alpha": "alpha_n = theta log(tau_{n+1}/tau_n)",
                                     "beta": "beta_n = theta^2 log tau_n",
                                     "gamma": "gamma_n tau_n tau_{n-1} = tau_{n+1} tau_{n-2}"}[name],
                f"n={n}", r, "flow")
    for (n, which), r in sorted(toda.toda2_residual(family, range(min(n_max, 6) + 1)).items()):
        label = "theta H_n / H_n = f_{n-1} - f_n" if which == 1 else \
            "theta^2 f_n - (2f_n - f_{n+1} - f_{n-1}) theta f_n = H_{n+1}/H_{n-1} - H_{n+2}/H_n"
        out.add(f"toda2-{which}", label, f"n={n}", r, "flow")
    for n in range(min(n_max, 6) + 1):
        out.add("tau-pde", "third-order tau equation", f"n={n}", toda.tau_pde_residual(family, n), "pde")
        out.add("tau-toda-single", "theta^2 tau - (theta tau)^2/tau = tau_{n+2} tau_n / tau (one weight)", f"n={n}",
                toda.single_weight_toda_residual(family, n), "pde")
    for (n, name), r in sorted(toda.abc_toda_residual(family, range(n_max + 1)).items()):
        out.add(f"abc-toda-{name}", f"theta {name} Toda equation", f"n={n}", r, "flow")
    for label, r in toda.lax_residual(family, size).items():
        out.add("lax", label, f"size={size}", r, "flow")
    res = toda.compat_II_residual(family, size)
    for label in ("theta Psi = [phi, Psi]", "theta Psi^T = Psi^T + [mu, Psi^T]", "[phi, Psi] = [Psi, T-]"):
        out.add("compat-II", label, f"size={size}", res[label], "flow")


def suite_lattice(family, n_max, out):
    sites = range(min(n_max, 3) + 1)
    letters = [x for x in "hct" if _has(family, x)]
    if not letters:
        return
    for n in sites:
        for (system, k), r in sorted(lattice.nc3d_residuals(family, n).items()):
            out.add(f"nc3d-{system}", f"{system} lattice equation {k}", f"n={n}", r, "lattice")
        for which, (letter, _) in lattice.SYSTEMS_2D.items():
            if letter in letters:
                for k, r in lattice.nc2d_residuals(family, n, which).items():
                    out.add(f"nc2d-{which}", f"{which} lattice equation {k}", f"n={n}", r, "lattice")
        if "h" in letters and "t" in letters:
            res, (sign, off) = lattice.nc_tau_residuals(family, n)
            for k, r in res.items():
                out.add("nc-tau", f"tau-form hat-tilde-bar equation {k} (f = {sign:+d} tau^1_(2n+{off})/tau_(2n+{off}))",
                        f"n={n}", r, "lattice")
            out.add("nc-tau-fields", "tau-pipeline fields = factorization fields", f"n={n}",
                    lattice.tau_field_agreement(family, n, sign=sign, offset=off), "lattice")
            out.add("nc-scalar", "one-weight hat-tilde-bar reduction", f"n={n}",
                    lattice.scalar_nc_residual(family, n), "lattice")
    size = max(2 * min(n_max, 3) + 2, 8)
    for label, r in lattice.shift_compat_residuals(family, size).items():
        out.add("shift-compat", label, f"size={size}", r, "matrix")


_RUNNERS = {
    "moments": suite_moments,
    "tau": suite_tau,
    "coeffs": suite_coeffs,
    "lf": suite_lf,
    "toda": suite_toda,
    "lattice": suite_lattice,
}


def run_suite(name, family, n_max):
    """Run one suite from a clean cache state; returns its records."""
    clear_caches()
    out = _Collector(name)
    try:
        _RUNNERS[name](family, n_max, out)
    finally:
        clear_caches()
    return out.records
