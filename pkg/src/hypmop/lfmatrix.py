"""Laguerre-Freud matrix Psi from both of its constructions, its band
structure and compatibility with T, and connection matrices for unit shifts
of the hypergeometric parameters."""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mpf

from .mops import PascalData, factorization, partial_pascal
from .numkernel import Mat, magnitude, parity_identity, shift, to_real, value_of
from .tau import moment_matrix
from .weights import shift_datum, shift_params


def poly_of_matrix(coeffs, X):
    """Horner evaluation of a polynomial (ascending coefficients) at a matrix."""
    n = X.n
    acc = None
    for c in reversed(coeffs):
        c = to_real(c)
        if acc is None:
            acc = Mat.identity(n).scale(c)
            acc.window = X.window
            continue
        acc = acc @ X
        acc = acc + Mat.identity(n).scale(c) if c != 0 else acc
    return acc


@dataclass
class LFMatrix:
    matrix: Mat
    lower: int  # 2M
    upper: int  # deg theta

    @property
    def window(self):
        return self.matrix.window

    def diagonal(self, k):
        """psi^(k): entries (i, i+k) inside the window."""
        return self.matrix.diagonal(k)

    def band_excess(self):
        return self.matrix.band_excess(self.lower, self.upper)


def _bands(family):
    return 2 * family.deg_sigma(), family.deg_theta


def lf_matrix(family, n, jets=False):
    """Psi = Pi^-1 theta(T)."""
    f = factorization(family, n, jets=jets)
    pd = PascalData(family, n, jets=jets)
    theta_T = poly_of_matrix(family.theta_coeffs(), f.T)
    lo, up = _bands(family)
    return LFMatrix(pd.Pi_inv @ theta_T, lo, up)


def type1_recursions(f, a):
    """T^(a) = H^-1 S~ Lambda^(a) S~^-1 H."""
    n = f.size
    lam_a = parity_identity(n, a) @ shift(n) @ shift(n)
    return f.Hinv_mat() @ f.St @ lam_a @ f.St_inv @ f.Hmat()


def lf_matrix_dual(family, n, jets=False):
    """Psi = sum_a sigma_a(T^(a)^T) Pi^(a)^T."""
    f = factorization(family, n, jets=jets)
    pd = PascalData(family, n, jets=jets)
    total = None
    for a in (1, 2):
        Ta = type1_recursions(f, a)
        term = poly_of_matrix(family.sigma_coeffs(a), Ta.T) @ pd.Pi_a[(a, 1)].T
        total = term if total is None else total + term
    lo, up = _bands(family)
    return LFMatrix(total, lo, up)


def window_diff(A, B):
    w = min(A.window, B.window)
    return (A - B).max_abs(window=w)


def compat_I_residual(family, n, jets=False):
    """max |[Psi, T] - Psi| on the valid window."""
    psi = lf_matrix(family, n, jets).matrix
    T = factorization(family, n, jets=jets).T
    R = psi.commutator(T) - psi
    if R.window <= 0:
        raise ValueError(f"no valid window at n={n}")
    return R.max_abs()


def charlier_psi(family, n):
    """eta1 I^(1) + eta2 I^(2) + Lambda."""
    e1, e2 = to_real(family.eta1), to_real(family.eta2)
    return parity_identity(n, 1).scale(e1) + parity_identity(n, 2).scale(e2) + shift(n)


def moment_contiguity_residuals(family, n, kind, index=0):
    """M Lambda^(a)T + b M = b Theta M  (b-shift) or  M (Lambda^T)^2 + (c-1) M = (c-1) Theta M."""
    M = moment_matrix(family, n, jets=False)
    shifted = shift_params(family, kind, index)
    MT = moment_matrix(shifted, n, jets=False)
    d = to_real(shift_datum(family, kind, index))
    L2 = shift(n) @ shift(n)
    if kind in ("b1+1", "b2+1"):
        a = 1 if kind == "b1+1" else 2
        lam = (parity_identity(n, a) @ L2).T
    else:
        lam = L2.T
    R = M @ lam + M.scale(d) - MT.scale(d)
    scale = max(mpf(1), M.max_abs(window=R.window))
    return R.max_abs() / scale


@dataclass
class ConnectionData:
    kind: str
    index: int
    d: object
    omega: Mat
    Omega: Mat
    base: object
    shifted: object

    def structure_residuals(self):
        """Band structure, diagonal value, subdiagonal formulas and omega^T = d Omega."""
        w, O = self.omega, self.Omega
        f, g = self.base, self.shifted
        d = self.d
        n = w.window
        out = {}
        out["omega band"] = w.band_excess(0, 2)
        out["Omega band"] = O.with_window(n).band_excess(2, 0)
        out["omega diagonal = d"] = max([abs(value_of(w[i, i]) - d) for i in range(n)] + [mpf(0)])
        r1 = mpf(0)
        for i in range(n - 1):
            expect = d * (value_of(f.S[i + 1, i]) - value_of(g.S[i + 1, i]))
            r1 = max(r1, abs(value_of(w[i, i + 1]) - expect))
        out["omega[1] = d(S[1] - Theta S[1])"] = r1
        r2 = mpf(0)
        a = {"b1+1": 1, "b2+1": 2}.get(self.kind)
        for i in range(n - 2):
            par = 1 if a is None or i % 2 == a - 1 else 0
            expect = par * value_of(f.H[i + 2]) / value_of(g.H[i])
            r2 = max(r2, abs(value_of(w[i, i + 2]) - expect))
        out["omega[2] = (Theta H)^-1 I a-^2 H"] = r2
        out["omega^T = d Omega"] = (w.T - O.scale(d)).max_abs(window=n)
        return out


def connection_matrices(family, kind, n, index=0, jets=False):
    shifted = shift_params(family, kind, index)
    f = factorization(family, n, jets=jets)
    g = factorization(shifted, n, jets=jets)
    d = to_real(shift_datum(family, kind, index))
    L2 = shift(n) @ shift(n)
    if kind in ("b1+1", "b2+1"):
        a = 1 if kind == "b1+1" else 2
        middle = parity_identity(n, a) @ L2 + Mat.identity(n).scale(d)
    else:
        middle = L2 + Mat.identity(n).scale(d)
    omega = g.Hinv_mat() @ g.St @ middle @ f.St_inv @ f.Hmat()
    Omega = f.S @ g.S_inv
    return ConnectionData(kind, index, d, omega, Omega, f, g)


def connection_formula_residuals(family, kind, n, z_samples, index=0):
    """Residuals of the connection formulas at each sample z.

    omega A(z) = (z + d) Theta A(z) for the weights the shift acts on,
    Omega Theta B(z) = B(z), theta(z) B(z-1) = Psi B(z) and
    sigma_a(z) A_a(z+1) = Psi^T A_a(z).
    """
    cd = connection_matrices(family, kind, n, index)
    f, g = cd.base, cd.shifted
    psi = lf_matrix(family, n).matrix
    lo, up = _bands(family)
    theta = family.theta_coeffs()
    out = {}
    acting = {"b1+1": (1,), "b2+1": (2,)}.get(kind, (1, 2))
    for z in z_samples:
        z = mpf(z)
        Bz = [f.B(k)(z) for k in range(n)]
        Bm = [f.B(k)(z - 1) for k in range(n)]
        A = {a: [f.A(a, k)(z) for k in range(n)] for a in (1, 2)}
        A1 = {a: [f.A(a, k)(z + 1) for k in range(n)] for a in (1, 2)}
        gA = {a: [g.A(a, k)(z) for k in range(n)] for a in (1, 2)}
        gB = [g.B(k)(z) for k in range(n)]
        w = cd.omega.window
        for a in (1, 2):
            worst = mpf(0)
            factor = (z + cd.d) if a in acting else cd.d
            for i in range(w):
                lhs = sum(cd.omega[i, j] * A[a][j] for j in range(i, min(i + 3, n)))
                rhs = factor * gA[a][i]
                worst = max(worst, abs(lhs - rhs) / max(1, abs(rhs)))
            out[(f"omega A{a}", int(z))] = worst
        worst = mpf(0)
        for i in range(n):
            lhs = sum(cd.Omega[i, j] * gB[j] for j in range(i + 1))
            worst = max(worst, abs(lhs - Bz[i]) / max(1, abs(Bz[i])))
        out[("Omega Theta B", int(z))] = worst
        thz = sum(to_real(c) * z ** k for k, c in enumerate(theta))
        worst = mpf(0)
        for i in range(min(psi.window, n - up)):
            lhs = thz * Bm[i]
            rhs = sum(psi[i, j] * Bz[j] for j in range(max(0, i - lo), i + up + 1))
            worst = max(worst, abs(lhs - rhs) / max(1, abs(lhs)))
        out[("theta B(z-1) = Psi B", int(z))] = worst
        for a in (1, 2):
            sz = sum(to_real(c) * z ** k for k, c in enumerate(family.sigma_coeffs(a)))
            worst = mpf(0)
            for i in range(max(0, psi.window - lo)):
                lhs = sz * A1[a][i]
                rhs = sum(psi[j, i] * A[a][j] for j in range(max(0, i - up), min(n, i + lo + 1)))
                worst = max(worst, abs(lhs - rhs) / max(1, abs(lhs)))
            out[(f"sigma A{a}(z+1) = Psi^T A{a}", int(z))] = worst
    return out
