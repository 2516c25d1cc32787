"""Continuous flows in log(eta): the wave matrices phi, phi~ and mu, the
two-component Toda equations, the third-order tau equation, the alpha/beta/gamma
system, the Lax pair and the theta-compatibility of the Laguerre-Freud matrix.

Every theta-derivative comes from the jet-valued factorization; the only
finite differences live in ``finite_difference_theta`` as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from mpmath import log, mpf

from .lfmatrix import lf_matrix
from .mops import factorization
from .numkernel import Jet3, Mat, magnitude, shift, to_real, value_of
from .tau import tau_table, tau_values


def _scaled(residual, terms):
    """|residual| relative to the largest term (absolute when all terms vanish)."""
    big = max([magnitude(t) for t in terms] + [mpf(0)])
    r = magnitude(residual)
    return r / big if big > 0 else r


@dataclass
class ThetaFlow:
    phi_a: dict  # a -> (theta_a S) S^-1
    phit_a: dict  # a -> (theta_a S~) S~^-1
    phi: Mat
    phit: Mat
    mu: Mat
    alpha: list
    beta: list  # entry n holds beta_{n+1}
    gamma: list  # entry n holds gamma_{n+2}
    H: list
    invariants: dict

    @property
    def T_plus(self):
        n = self.phi.n
        return Mat.diag(self.alpha + [0] * (n - len(self.alpha))) + shift(n)

    @property
    def T_minus(self):
        """(Lambda^T)^2 gamma + Lambda^T beta."""
        n = self.phi.n

        def entry(i, j):
            if i - j == 1 and j < len(self.beta):
                return self.beta[j]
            if i - j == 2 and j < len(self.gamma):
                return self.gamma[j]
            return 0
        return Mat.from_function(n, entry, lower=2, upper=-1)


def theta_flow(family, n):
    """Wave matrices of the n x n jet factorization plus their structural checks."""
    f = factorization(family, n, jets=True)
    S_inv, St_inv = f.S_inv.values(), f.St_inv.values()
    phi_a = {1: f.S.slot(1, 0) @ S_inv, 2: f.S.slot(0, 1) @ S_inv}
    phit_a = {1: f.St.slot(1, 0) @ St_inv, 2: f.St.slot(0, 1) @ St_inv}
    phi = phi_a[1] + phi_a[2]
    phit = phit_a[1] + phit_a[2]
    H = [value_of(h) for h in f.H]
    dH = [h.theta(1) for h in f.H]
    Hm, Him = Mat.diag(H), Mat.diag([1 / h for h in H])
    mu = Mat.diag([-d / h for d, h in zip(dH, H)]) + Him @ phit @ Hm
    T = f.T.values()
    w = T.window
    alpha = [T[i, i] for i in range(w)]
    beta = [T[i + 1, i] for i in range(w - 1)]
    gamma = [T[i + 2, i] for i in range(w - 2)]

    inv = {}
    inv["phi strictly lower, two subdiagonals"] = phi.band_excess(2, -1)
    inv["-phi = (L^T)^2 gamma + L^T beta"] = max(
        [magnitude(phi[i + 1, i] + beta[i]) for i in range(len(beta))]
        + [magnitude(phi[i + 2, i] + gamma[i]) for i in range(len(gamma))] + [mpf(0)])
    inv["phi~ single subdiagonal"] = phit.band_excess(1, -1)
    inv["-phi~ = L^T (a- H) H^-1"] = max(
        [_scaled(phit[i + 1, i] + H[i + 1] / H[i], [H[i + 1] / H[i]]) for i in range(n - 1)] + [mpf(0)])
    inv["(theta H) H^-1 = alpha"] = max(
        [_scaled(dH[i] / H[i] - alpha[i], [alpha[i], dH[i] / H[i]]) for i in range(w)] + [mpf(0)])
    inv["theta S[1] = -beta"] = max(
        [magnitude(f.S[i + 1, i].theta(1) + beta[i]) for i in range(len(beta))] + [mpf(0)])
    inv["theta S~[1] = -H^-1 a- H"] = max(
        [_scaled(f.St[i + 1, i].theta(1) + H[i + 1] / H[i], [H[i + 1] / H[i]]) for i in range(n - 1)]
        + [mpf(0)])
    inv["mu = -alpha - L^T"] = max(
        [magnitude(mu[i, i] + alpha[i]) for i in range(w)]
        + [magnitude(mu[i + 1, i] + 1) for i in range(n - 1)]
        + [mu.band_excess(1, 0)])
    return ThetaFlow(phi_a, phit_a, phi.banded(2, -1), phit.banded(1, -1), mu.banded(1, 0),
                     alpha, beta, gamma, H, inv)


def theta_coefficient_identities(family, n):
    """Residuals of the S / S~ / H expressions for alpha, beta, gamma under theta.

    Entry k of the diagonal matrices: alpha_k, beta_{k+1}, gamma_{k+2}.
    """
    f = factorization(family, n, jets=True)
    T = f.T.values()
    w = T.window
    S, H = f.S, f.H
    out = {}
    r = mpf(0)
    for k in range(w - 1):
        s_prev = S[k, k - 1].value if k >= 1 else 0
        r = max(r, magnitude(s_prev - S[k + 1, k].value - T[k, k]))
    out["alpha = a+ S[1] - S[1]"] = r
    r = mpf(0)
    for k in range(w - 1):
        r = max(r, magnitude(-S[k + 1, k].theta(1) - T[k + 1, k]))
    out["beta = -theta S[1]"] = r
    r = mpf(0)
    for k in range(min(w - 2, n - 2)):
        expect = T[k + 2, k]
        via_s = -S[k + 2, k].theta(1) + S[k + 2, k + 1].theta(1) * S[k + 1, k].value
        via_h = H[k + 2].value / H[k].value
        r = max(r, _scaled(via_s - expect, [expect, via_s]), _scaled(via_h - expect, [expect, via_h]))
    out["gamma = -theta S[2] + (theta a- S[1]) S[1] = H^-1 a-^2 H"] = r
    return out


def tau_coefficient_residuals(family, n_max):
    """alpha_n = theta log(tau_{n+1}/tau_n), beta_n = theta^2 log tau_n and
    gamma_n tau_n tau_{n-1} = tau_{n+1} tau_{n-2}, for n <= n_max."""
    taus = tau_table(family, n_max + 1)
    logs = [t.log_abs() for t in taus]
    rec = factorization(family, n_max + 2).T
    out = {}
    for n in range(n_max + 1):
        a = logs[n + 1].theta(1) - logs[n].theta(1)
        out[("alpha", n)] = _scaled(a - rec[n, n], [rec[n, n], a])
        if n >= 1:
            b = logs[n].theta(2)
            out[("beta", n)] = _scaled(b - rec[n, n - 1], [rec[n, n - 1], b])
        if n >= 2:
            lhs = rec[n, n - 2] * taus[n].value * taus[n - 1].value
            rhs = taus[n + 1].value * taus[n - 2].value
            out[("gamma", n)] = _scaled(lhs - rhs, [lhs, rhs])
    return out


def toda2_residual(family, n_range):
    """Both equations of the two-component Toda system with q_n = log H_n, f_n = S[1]_n.

    The first is checked as theta H_n / H_n = f_{n-1} - f_n; the exponentials
    in the second are the ratios H_{n+1}/H_{n-1} and H_{n+2}/H_n (the first
    absent at n = 0).
    """
    n_range = list(n_range)
    f = factorization(family, max(n_range) + 3, jets=True)
    S, H = f.S, f.H
    fj = lambda k: S[k + 1, k] if k >= 0 else Jet3.constant(mpf(0))
    out = {}
    for n in n_range:
        h = H[n]
        first = h.theta(1) / h.value - (fj(n - 1).value - fj(n).value)
        out[(n, 1)] = _scaled(first, [h.theta(1) / h.value, fj(n - 1).value, fj(n).value])
        fn = fj(n)
        lhs = fn.theta(2) - (2 * fn.value - fj(n + 1).value - fj(n - 1).value) * fn.theta(1)
        e1 = H[n + 1].value / H[n - 1].value if n >= 1 else mpf(0)
        e2 = H[n + 2].value / H[n].value
        out[(n, 2)] = _scaled(lhs - (e1 - e2), [fn.theta(2), lhs, e1, e2])
    return out


TAU_PDE_SIGNS = (1, -1)


def tau_pde_residual(family, n, sign=1):
    """Residual of the third-order equation for tau_{n+1}.

    With l_k = theta tau_k / tau_k:
      theta^3 t - (l_{n+2} + l_{n+1} + l_n) theta^2 t + (theta t)^2 / t * (l_{n+2} +- l_n)
        = tau_{n+3} tau_n / tau_{n+2} - tau_{n+2} tau_{n-1} / tau_n,   t = tau_{n+1},
    with ``sign`` choosing between l_{n+2} + l_n (the identity) and l_{n+2} - l_n;
    tau_{-1} = 0.
    """
    taus = tau_table(family, n + 3)
    t = taus[n + 1]
    l = lambda k: taus[k].theta(1) / taus[k].value
    d1, d2, d3 = t.theta(1), t.theta(2), t.theta(3)
    lhs = d3 - (l(n + 2) + l(n + 1) + l(n)) * d2 + d1 ** 2 / t.value * (l(n + 2) + sign * l(n))
    r1 = taus[n + 3].value * taus[n].value / taus[n + 2].value
    r2 = taus[n + 2].value * taus[n - 1].value / taus[n].value if n >= 1 else mpf(0)
    return _scaled(lhs - (r1 - r2), [d3, lhs, r1, r2])


def single_weight_toda_residual(family, n):
    """theta^2 t - (theta t)^2 / t = tau_{n+2} tau_n / t, t = tau_{n+1}, for the
    Hankel determinants of the first weight alone."""
    taus = tau_table(family, n + 2, hankel=True)
    t = taus[n + 1]
    lhs = t.theta(2) - t.theta(1) ** 2 / t.value
    rhs = taus[n + 2].value * taus[n].value / t.value
    return _scaled(lhs - rhs, [t.theta(2), lhs, rhs])


def abc_toda_residual(family, n_range):
    """theta alpha_n = beta_{n+1} - beta_n,
    theta beta_{n+1} = gamma_{n+2} - gamma_{n+1} + beta_{n+1}(alpha_{n+1} - alpha_n),
    theta gamma_{n+2} = gamma_{n+2}(alpha_{n+2} - alpha_n)."""
    n_range = list(n_range)
    T = factorization(family, max(n_range) + 4, jets=True).T
    a = lambda k: T[k, k]
    b = lambda k: T[k, k - 1] if k >= 1 else 0
    g = lambda k: T[k, k - 2] if k >= 2 else 0
    val = lambda x: x.value if isinstance(x, Jet3) else mpf(x)
    th = lambda x: x.theta(1) if isinstance(x, Jet3) else mpf(0)
    out = {}
    for n in n_range:
        rhs = val(b(n + 1)) - val(b(n))
        out[(n, "alpha")] = _scaled(th(a(n)) - rhs, [th(a(n)), val(b(n + 1)), val(b(n))])
        rhs = val(g(n + 2)) - val(g(n + 1)) + val(b(n + 1)) * (val(a(n + 1)) - val(a(n)))
        out[(n, "beta")] = _scaled(th(b(n + 1)) - rhs, [th(b(n + 1)), rhs, val(g(n + 2)), val(g(n + 1))])
        rhs = val(g(n + 2)) * (val(a(n + 2)) - val(a(n)))
        out[(n, "gamma")] = _scaled(th(g(n + 2)) - rhs, [th(g(n + 2)), rhs])
    return out


def lax_residual(family, n):
    """max |theta T - [T+, T]| together with |theta T - [phi, T]| and |[T+,T] - [-T-,T]|."""
    f = factorization(family, n, jets=True)
    flow = theta_flow(family, n)
    T = f.T.values()
    dT = f.T.theta(1)
    Tp, Tm = flow.T_plus, flow.T_minus
    scale = max(mpf(1), T.max_abs())
    c1 = Tp.commutator(T)
    out = {
        "theta T = [T+, T]": (dT - c1).max_abs() / scale,
        "theta T = [phi, T]": (dT - flow.phi.commutator(T)).max_abs() / scale,
        "[T+, T] = [-T-, T]": (c1 + Tm.commutator(T)).max_abs() / scale,
    }
    return out


def compat_II_residual(family, n):
    """max |theta Psi - [phi, Psi]| and max |theta Psi^T - Psi^T - [mu, Psi^T]|.

    Psi is clipped to its proven band before the products so that the valid
    windows stay finite; the clipped-away part is reported as ``band excess``.
    """
    lf = lf_matrix(family, n, jets=True)
    flow = theta_flow(family, n)
    raw = lf.matrix
    psi_jet = raw.banded(lf.lower, lf.upper)
    psi = psi_jet.values()
    dpsi = psi_jet.theta(1)
    scale = max(mpf(1), psi.max_abs())
    r1 = dpsi - flow.phi.commutator(psi)
    psiT = psi.T
    r2 = dpsi.T - psiT - flow.mu.commutator(psiT)
    alt = flow.phi.commutator(psi) - psi.commutator(flow.T_minus)
    return {
        "theta Psi = [phi, Psi]": r1.max_abs() / scale,
        "theta Psi^T = Psi^T + [mu, Psi^T]": r2.max_abs() / scale,
        "[phi, Psi] = [Psi, T-]": alt.max_abs() / scale,
        "band excess": raw.values().band_excess(lf.lower, lf.upper) / scale,
        "windows": (r1.window, r2.window),
    }


def finite_difference_theta(family, n, h_bits=64):
    """Central-difference estimate of theta tau_n with both etas scaled by (1 +- h).

    The step is exact in rationals; the denominator is the exact log-step.
    """
    h = Fraction(1, 2 ** h_bits)
    up = replace(family, eta1=family.eta1 * (1 + h), eta2=family.eta2 * (1 + h))
    dn = replace(family, eta1=family.eta1 * (1 - h), eta2=family.eta2 * (1 - h))
    tu = tau_values(up, n)[n]
    td = tau_values(dn, n)[n]
    hr = to_real(h)
    step = log(1 + hr) - log(1 - hr)
    return (tu - td) / step


def jet_derivatives(family, n):
    """theta tau_n, theta^2 tau_n, theta^3 tau_n from the jet factorization."""
    t = tau_table(family, n)[n]
    return [t.theta(k) for k in (1, 2, 3)]

