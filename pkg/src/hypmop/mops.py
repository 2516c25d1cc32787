"""Type II / type I multiple orthogonal polynomials, recursion coefficients,
Pascal shift matrices, and residual checks for orthogonality and recurrences."""

from __future__ import annotations

import math
from dataclasses import dataclass

from mpmath import mp, mpf

from .numkernel import INF, Jet3, Mat, det, magnitude, parity_identity, shift, tolerance, value_of
from .tau import factorize, moment_matrix, moments_needed, tau_assoc, tau_values
from .weights import moment_table


def deg_typeI(n, a):
    return -(-(n + 2 - a) // 2) - 1


@dataclass
class PolynomialVector:
    coeffs: list  # ascending powers
    role: str  # "typeII" or "typeI(1)" / "typeI(2)"

    def __call__(self, z):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def degree(self, tol=None):
        tol = tolerance(len(self.coeffs)) if tol is None else tol
        scale = max([abs(c) for c in self.coeffs] + [mpf(0)])
        for i in range(len(self.coeffs) - 1, -1, -1):
            if abs(self.coeffs[i]) > tol * max(scale, 1):
                return i
        return -1


def typeII(family, n):
    """B_n from associated taus: coefficient of x^(n-j) is (-1)^j tau^j_n / tau_n."""
    if n == 0:
        return PolynomialVector([mpf(1)], "typeII")
    tn = tau_values(family, n)[n]
    coeffs = [mpf(0)] * (n + 1)
    coeffs[n] = mpf(1)
    for j in range(1, n + 1):
        coeffs[n - j] = (-1) ** j * tau_assoc(family, n, j) / tn
    return PolynomialVector(coeffs, "typeII")


def typeI(family, a, n):
    """A^(a)_n from the bordered determinant expanded along its last row."""
    t = tau_values(family, n + 1)[n + 1]
    rows = moment_matrix(family, n + 1, jets=False).values().rows[:n]
    deg = deg_typeI(n, a)
    coeffs = [mpf(0)] * max(deg + 1, 0)
    for m in range(deg + 1):
        j = 2 * m + a - 1
        if j > n:
            continue
        minor = [[r[k] for k in range(n + 1) if k != j] for r in rows]
        coeffs[m] = (-1) ** (n + j) * det(minor) / t
    return PolynomialVector(coeffs, f"typeI({a})")


class Factorization:
    """Gauss-Borel data of a truncation plus the derived recursion matrix."""

    def __init__(self, family, size, jets=False, hankel=False):
        self.family = family
        self.size = size
        self.jets = jets
        gb = factorize(family, size, jets=jets, hankel=hankel)
        self.gb = gb
        self.S, self.S_inv, self.St, self.St_inv = gb.S, gb.S_inv, gb.St, gb.St_inv
        self.H = gb.H
        self.T = self.S @ shift(size) @ self.S_inv

    def Hmat(self):
        return Mat.diag(self.H)

    def Hinv_mat(self):
        return Mat.diag([1 / h for h in self.H])

    def sub(self, k, tilde=False):
        """k-th subdiagonal S^[k]_j = S_{j+k, j} (or of S-tilde)."""
        M = self.St if tilde else self.S
        return [M[j + k, j] for j in range(self.size - k)]

    def sub_inv(self, k, tilde=False):
        M = self.St_inv if tilde else self.S_inv
        return [M[j + k, j] for j in range(self.size - k)]

    def B(self, n):
        return PolynomialVector([value_of(self.S[n, j]) for j in range(n + 1)], "typeII")

    def A(self, a, n):
        deg = deg_typeI(n, a)
        h = value_of(self.H[n])
        return PolynomialVector([value_of(self.St[n, 2 * m + a - 1]) / h for m in range(deg + 1)],
                                f"typeI({a})")

    @property
    def valid(self):
        """Largest n with alpha_n, beta_n, gamma_n fully represented."""
        return self.T.window - 1


_FCACHE = {}


def factorization(family, size, jets=False, hankel=False):
    key = (family.key(), size, jets, hankel, mp.prec)
    f = _FCACHE.get(key)
    if f is None:
        f = Factorization(family, size, jets, hankel)
        _FCACHE[key] = f
    return f


@dataclass
class RecursionData:
    alpha: list
    beta: list  # beta[0] = 0
    gamma: list  # gamma[0] = gamma[1] = 0
    source: str = "T = S Lambda S^-1"

    @property
    def n_max(self):
        return len(self.alpha) - 1


def recursion_coeffs(family, n_max, jets=False):
    f = factorization(family, n_max + 2, jets=jets)
    T = f.T
    alpha = [T[n, n] for n in range(n_max + 1)]
    beta = [0] + [T[n, n - 1] for n in range(1, n_max + 1)]
    gamma = [0, 0] + [T[n, n - 2] for n in range(2, n_max + 1)]
    return RecursionData(alpha, beta, gamma)


def _up(diag, k=1):
    """a_+^k: shift entries down by k, zero-filling the front."""
    return [0] * k + diag[:len(diag) - k] if k < len(diag) else [0] * len(diag)


def _down(diag, k=1):
    """a_-^k: drop the first k entries."""
    return diag[k:]


def coefficient_expressions(family, n_max):
    """The alternative S / S-tilde / H expressions for the diagonal matrices
    alpha, beta (entry n holds beta_{n+1}) and gamma (entry n holds gamma_{n+2})."""
    f = factorization(family, n_max + 4)
    L = n_max + 1
    s1, s2 = f.sub(1), f.sub(2)
    si1 = f.sub_inv(1)
    t1, t2 = f.sub(1, True), f.sub(2, True)
    ti1 = f.sub_inv(1, True)
    H = f.H
    up = lambda d, k=1: [0] * k + d
    alpha = {
        "S[-1] + a+S[1]": [si1[n] + up(s1)[n] for n in range(L)],
        "a+S[1] - S[1]": [up(s1)[n] - s1[n] for n in range(L)],
        "S~[2], S~[1]": [up(t2, 2)[n] - t2[n] + t1[n] * (t1[n + 1] - up(t1)[n]) for n in range(L)],
    }
    a_ref = alpha["a+S[1] - S[1]"] + [up(s1)[n] - s1[n] for n in range(L, L + 1)]
    beta = {
        "H, S~[-1]": [H[n + 1] / H[n] * (up(t1)[n] + ti1[n + 1]) for n in range(L)],
        "H, S~[1]": [H[n + 1] / H[n] * (up(t1)[n] - t1[n + 1]) for n in range(L)],
        "S[2], S[1], alpha": [up(s2)[n] - s2[n] - s1[n] * a_ref[n + 1] for n in range(L)],
    }
    gamma = {"H": [H[n + 2] / H[n] for n in range(L)]}
    return {"alpha": alpha, "beta": beta, "gamma": gamma}


def _scaled(total, terms):
    return abs(total) / max(mpf(1), max([abs(t) for t in terms] + [mpf(0)]))


def orthogonality_residuals(family, n):
    """Scaled residuals of the type II and type I orthogonality sums.

    Sums over k are evaluated as combinations of moments, which carry the same
    series truncation as the moments themselves.
    """
    f = factorization(family, n + 2)
    tab = moment_table(family, 2 * n + 4)
    out = {}
    if n >= 1:
        B = f.B(n)
        for a in (1, 2):
            for m in range(deg_typeI(n - 1, a) + 1):
                terms = [B.coeffs[j] * tab.rho(a, j + m) for j in range(n + 1)]
                out[("II", a, m)] = _scaled(sum(terms), terms)
        A = {a: f.A(a, n) for a in (1, 2)}
        for m in range(n):
            terms = [A[a].coeffs[i] * tab.rho(a, i + m) for a in (1, 2) for i in range(len(A[a].coeffs))]
            out[("I", 0, m)] = _scaled(sum(terms), terms)
    return out


def typeI_normalization(family, n):
    """sum_a sum_k A^(a)_n(k) w_a(k) k^n, which equals 1."""
    f = factorization(family, n + 2)
    tab = moment_table(family, 2 * n + 4)
    total = mpf(0)
    for a in (1, 2):
        A = f.A(a, n)
        total += sum(A.coeffs[i] * tab.rho(a, i + n) for i in range(len(A.coeffs)))
    return total


def recurrence_residual(family, n, z_samples):
    f = factorization(family, n + 3)
    rec = recursion_coeffs(family, n + 1)
    B = [f.B(k) for k in range(n + 2)]
    worst = mpf(0)
    for z in z_samples:
        z = mpf(z)
        r = z * B[n](z) - B[n + 1](z) - rec.alpha[n] * B[n](z)
        scale = max(abs(z * B[n](z)), abs(B[n + 1](z)), 1)
        if n >= 1:
            r -= rec.beta[n] * B[n - 1](z)
        if n >= 2:
            r -= rec.gamma[n] * B[n - 2](z)
        worst = max(worst, abs(r) / scale)
    return worst


# Pascal machinery

def pascal(n, sign=1):
    """L (sign=+1) or L^-1 (sign=-1) truncated to n x n."""
    return Mat.from_function(n, lambda i, j: (sign) ** (i + j) * math.comb(i, j) if i >= j else 0,
                             lower=INF, upper=0)


def partial_pascal(n, a, sign=1):
    """L^{+-(a)}: binomials on the parity-(a) sublattice."""
    def entry(i, j):
        if i % 2 != a - 1 or j % 2 != a - 1 or i < j:
            return 0
        p, q = (i - a + 1) // 2, (j - a + 1) // 2
        return sign ** (p + q) * math.comb(p, q)
    return Mat.from_function(n, entry, lower=INF, upper=0)


class PascalData:
    def __init__(self, family, n, jets=False):
        f = factorization(family, n, jets=jets)
        self.f = f
        self.n = n
        self.L = pascal(n)
        self.L_inv = pascal(n, -1)
        self.Pi = f.S @ self.L @ f.S_inv
        self.Pi_inv = f.S @ self.L_inv @ f.S_inv
        Hm, Hi = f.Hmat(), f.Hinv_mat()
        self.Pi_a = {}
        for a in (1, 2):
            for s in (1, -1):
                self.Pi_a[(a, s)] = Hi @ f.St @ partial_pascal(n, a, s) @ f.St_inv @ Hm


def pascal_shift_residuals(family, n, z=2):
    """Residuals of B(z+1) = Pi B(z), A(z+-1) = Pi^(+-a) A(z) and L^(a) L^-(a) = I^(a)."""
    pd = PascalData(family, n)
    f = pd.f
    z = mpf(z)
    out = {}
    Bz = [f.B(k)(z) for k in range(n)]
    worst = mpf(0)
    for k in range(n):
        lhs = f.B(k)(z + 1)
        rhs = sum(pd.Pi[k, j] * Bz[j] for j in range(k + 1))
        worst = max(worst, abs(lhs - rhs) / max(1, abs(lhs)))
    out["B(z+1)"] = worst
    worst = mpf(0)
    for k in range(n):
        lhs = f.B(k)(z - 1)
        rhs = sum(pd.Pi_inv[k, j] * Bz[j] for j in range(k + 1))
        worst = max(worst, abs(lhs - rhs) / max(1, abs(lhs)))
    out["B(z-1)"] = worst
    for a in (1, 2):
        Az = [f.A(a, k)(z) for k in range(n)]
        for s in (1, -1):
            worst = mpf(0)
            for k in range(n):
                lhs = f.A(a, k)(z + s)
                rhs = sum(pd.Pi_a[(a, s)][k, j] * Az[j] for j in range(k + 1))
                worst = max(worst, abs(lhs - rhs) / max(1, abs(lhs)))
            out[f"A{a}(z{'+' if s > 0 else '-'}1)"] = worst
    for a in (1, 2):
        prod = partial_pascal(n, a) @ partial_pascal(n, a, -1)
        out[f"L{a} L-{a}"] = (prod - parity_identity(n, a)).max_abs()
    return out
