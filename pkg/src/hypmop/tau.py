"""Moment matrix, tau functions and their jets, associated taus, and two
independent determinant oracles (Wronskian of pFq derivatives, column bumps)."""

from __future__ import annotations

import itertools
import math

from mpmath import mp, mpf

from .numkernel import GaussBorel, Jet3, Mat, det, to_real
from .weights import moment_table, pfq_eval, pochhammer


def moments_needed(n):
    """Highest moment index used by an n x n truncation."""
    if n <= 0:
        return 0
    return (n - 1) + (n - 1) // 2


def entry_index(r, col, hankel=False):
    """(weight, moment index) of entry (r, col)."""
    if hankel:
        return 1, r + col
    return col % 2 + 1, r + col // 2


def moment_matrix(family, n, jets=True, hankel=False, extra_rows=0):
    """n x n truncation (plus ``extra_rows`` rows) of the bi-Hankel moment matrix.

    ``hankel`` switches to the single-weight Hankel matrix rho^(1)_{i+j}.
    """
    top = moments_needed(n) + extra_rows + (n if hankel else 0)
    tab = moment_table(family, top)
    rows = []
    for r in range(n + extra_rows):
        row = []
        for col in range(n):
            a, k = entry_index(r, col, hankel)
            row.append(tab.jet(a, k) if jets else tab.rho(a, k))
        rows.append(row)
    if extra_rows:
        return rows
    return Mat(rows)


_FACT = {}


def factorize(family, n, jets=False, hankel=False):
    """Cached Gauss-Borel factorization of the n x n truncation."""
    key = (family.key(), n, jets, hankel, mp.prec)
    gb = _FACT.get(key)
    if gb is None:
        gb = GaussBorel(moment_matrix(family, n, jets=jets, hankel=hankel))
        _FACT[key] = gb
    return gb


def clear_caches():
    _FACT.clear()
    from . import weights
    weights._TABLES.clear()


def tau_table(family, n_max, hankel=False):
    """Jets tau_0..tau_{n_max}."""
    if n_max == 0:
        return [Jet3.constant(mpf(1))]
    gb = factorize(family, n_max, jets=True, hankel=hankel)
    return [Jet3.constant(mpf(1))] + list(gb.minors[1:])


def tau(family, n, hankel=False):
    return tau_table(family, n, hankel)[n]


def tau_values(family, n_max, hankel=False):
    if n_max == 0:
        return [mpf(1)]
    gb = factorize(family, n_max, jets=False, hankel=hankel)
    return [mpf(1)] + list(gb.minors[1:])


def tau_assoc(family, n, j, boundary_zero=False):
    """Determinant of the n x n truncation with row n-j removed and row n appended."""
    if j < 1 or j > n:
        if boundary_zero and j > n:
            return mpf(0)
        raise IndexError(f"associated tau needs 1 <= j <= n (got n={n}, j={j})")
    rows = moment_matrix(family, n, jets=False, extra_rows=1)
    keep = [rows[r] for r in range(n + 1) if r != n - j]
    return det(keep)


def _stirling2_rows(kmax):
    S = [[0] * (kmax + 1) for _ in range(kmax + 1)]
    S[0][0] = 1
    for k in range(1, kmax + 1):
        for j in range(1, k + 1):
            S[k][j] = j * S[k - 1][j] + S[k - 1][j - 1]
    return S


def theta_powers_pfq(b, c, eta, kmax):
    """theta^k F for F = pFq(b; c; eta), k = 0..kmax, via Stirling numbers and
    the derivative rule F^(j) = prod(b)_j / prod(c)_j pFq(b+j; c+j)."""
    e = to_real(eta)
    derivs = []
    for j in range(kmax + 1):
        coef = mpf(1)
        for x in b:
            coef *= pochhammer(x, j)
        for x in c:
            coef /= pochhammer(x, j)
        val, _ = pfq_eval([x + j for x in b], [x + j for x in c], eta)
        derivs.append(coef * val * e ** j)
    S = _stirling2_rows(kmax)
    return [sum(S[k][j] * derivs[j] for j in range(k + 1)) for k in range(kmax + 1)]


def wronskian_tau(family, n):
    """tau_n as the double Wronskian built from theta-derivatives of the two pFq values."""
    if n == 0:
        return mpf(1)
    kmax = moments_needed(n)
    cols = {a: theta_powers_pfq(family.b(a), family.c, family.eta(a), kmax) for a in (1, 2)}
    rows = []
    for r in range(n):
        rows.append([cols[col % 2 + 1][r + col // 2] for col in range(n)])
    return det(rows)


def bumped_derivative(family, n, i, j):
    """theta1^i theta2^j tau_n as a sum of column-bumped determinants.

    A theta_a derivative moves a weight-a column two places to the right, so
    the derivative of the determinant is a multinomial sum over bump patterns.
    """
    if n == 0:
        return mpf(1) if i == j == 0 else mpf(0)
    tab = moment_table(family, moments_needed(n) + i + j)
    cols_a = {1: [c for c in range(n) if c % 2 == 0], 2: [c for c in range(n) if c % 2 == 1]}
    total = mpf(0)
    for e1 in _compositions(i, len(cols_a[1])):
        for e2 in _compositions(j, len(cols_a[2])):
            bump = {}
            for c, e in zip(cols_a[1], e1):
                bump[c] = e
            for c, e in zip(cols_a[2], e2):
                bump[c] = e
            weight = math.factorial(i) * math.factorial(j)
            for e in itertools.chain(e1, e2):
                weight //= math.factorial(e)
            rows = []
            for r in range(n):
                rows.append([tab.rho(c % 2 + 1, r + c // 2 + bump[c]) for c in range(n)])
            total += weight * det(rows)
    return total


def bumped_theta(family, n, k):
    """(theta1 + theta2)^k tau_n from bumped determinants."""
    return sum(math.comb(k, i) * bumped_derivative(family, n, i, k - i) for i in range(k + 1))


def _compositions(total, parts):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest
