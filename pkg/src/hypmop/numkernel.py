"""Arbitrary-precision kernel: working precision, bivariate third-order jets,
dense matrices that remember their valid window, and pivot-free LDU."""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction

import mpmath
from mpmath import mp, mpf

DEFAULT_PRECISION = 256
INF = 1 << 30  # "unbounded" bandwidth / window

JET_ORDER = 3
SLOTS = ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2),
         (3, 0), (2, 1), (1, 2), (0, 3))
SLOT_INDEX = {s: k for k, s in enumerate(SLOTS)}
NSLOTS = len(SLOTS)


def _product_plan():
    plan = []
    for k, (i, j) in enumerate(SLOTS):
        terms = []
        for p, (a, b) in enumerate(SLOTS):
            rest = (i - a, j - b)
            if rest in SLOT_INDEX:
                terms.append((p, SLOT_INDEX[rest]))
        plan.append(tuple(terms))
    return tuple(plan)


_PLAN = _product_plan()


class BreakdownError(ArithmeticError):
    """A leading principal minor vanished; ``index`` is the first k with tau_k = 0."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"factorization breakdown: tau_{index} vanishes")


class ConvergenceError(ArithmeticError):
    pass


@contextmanager
def working_precision(bits):
    with mp.workprec(int(bits)):
        yield


def to_real(x):
    """Convert int, Fraction, decimal string or mpf to an mpf at the current precision."""
    if isinstance(x, Jet3):
        raise TypeError("jet passed where a real was expected")
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, str):
        return to_real(Fraction(x))
    return mpf(x)


def magnitude(x):
    if isinstance(x, Jet3):
        return abs(x.c[0])
    return abs(x)


def value_of(x):
    return x.c[0] if isinstance(x, Jet3) else x


def tolerance(n, precision=None, floor=0):
    """Default residual threshold floor + 2^-(P-8n)."""
    p = mp.prec if precision is None else precision
    return floor + mpf(2) ** (-(p - 8 * n))


def rel_dev(x, y, tiny=None):
    tiny = mpf(2) ** (-mp.prec) if tiny is None else tiny
    return abs(x - y) / max(abs(y), tiny)


class Jet3:
    """Truncated Taylor expansion in (t1, t2) = (log eta1, log eta2).

    Slot (i, j) stores the Taylor coefficient, so theta1^i theta2^j f = i! j! c[i,j].
    """

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = tuple(coeffs)
        if len(self.c) != NSLOTS:
            raise ValueError("a jet carries exactly 10 coefficients")

    @classmethod
    def constant(cls, v):
        return cls((v,) + (0,) * (NSLOTS - 1))

    @classmethod
    def from_derivatives(cls, derivs):
        """Build from a mapping (i, j) -> theta1^i theta2^j f."""
        return cls(derivs.get(s, 0) / (math.factorial(s[0]) * math.factorial(s[1]))
                   for s in SLOTS)

    @classmethod
    def eta(cls, a, value):
        """The coordinate eta_a = exp(t_a) at the given value."""
        v = to_real(value)
        d = {}
        for k in range(JET_ORDER + 1):
            d[(k, 0) if a == 1 else (0, k)] = v
        return cls.from_derivatives(d)

    @property
    def value(self):
        return self.c[0]

    def coeff(self, i, j):
        return self.c[SLOT_INDEX[(i, j)]]

    def d(self, i, j):
        """theta1^i theta2^j applied to the function."""
        return self.c[SLOT_INDEX[(i, j)]] * (math.factorial(i) * math.factorial(j))

    def theta(self, k=1):
        """Total derivative (theta1 + theta2)^k."""
        return math.factorial(k) * sum(self.c[SLOT_INDEX[(i, k - i)]] for i in range(k + 1))

    def theta_tilde(self, k=1):
        """(theta1 - theta2)^k."""
        return math.factorial(k) * sum((-1) ** (k - i) * self.c[SLOT_INDEX[(i, k - i)]]
                                       for i in range(k + 1))

    def first(self, a):
        return self.c[1] if a == 1 else self.c[2]

    def partial(self, a):
        """Jet of theta_a f, truncated to what order 3 allows (order-3 slots become 0)."""
        out = [0] * NSLOTS
        for k, (i, j) in enumerate(SLOTS):
            src = (i + 1, j) if a == 1 else (i, j + 1)
            if src in SLOT_INDEX:
                out[k] = self.c[SLOT_INDEX[src]] * (src[0] if a == 1 else src[1])
        return Jet3(out)

    def map(self, f):
        return Jet3(f(x) for x in self.c)

    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3(x + y for x, y in zip(self.c, other.c))
        return Jet3((self.c[0] + other,) + self.c[1:])

    __radd__ = __add__

    def __neg__(self):
        return Jet3(-x for x in self.c)

    def __sub__(self, other):
        if isinstance(other, Jet3):
            return Jet3(x - y for x, y in zip(self.c, other.c))
        return Jet3((self.c[0] - other,) + self.c[1:])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet3):
            a, b = self.c, other.c
            return Jet3(sum(a[p] * b[q] for p, q in terms) for terms in _PLAN)
        if other == 0:
            return 0
        return Jet3(x * other for x in self.c)

    __rmul__ = __mul__

    def reciprocal(self):
        b0 = self.c[0]
        if b0 == 0:
            raise ZeroDivisionError("jet with zero value")
        inv = 1 / b0
        e = Jet3((0,) + tuple(x * inv for x in self.c[1:]))
        e2 = e * e
        e3 = e2 * e
        s = (1 - e + e2 - e3)
        return s * inv

    def __truediv__(self, other):
        if isinstance(other, Jet3):
            return self * other.reciprocal()
        return Jet3(x / other for x in self.c)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def log_abs(self):
        """Jet of log|f|."""
        b0 = self.c[0]
        e = Jet3((0,) + tuple(x / b0 for x in self.c[1:]))
        e2 = e * e
        e3 = e2 * e
        s = e - e2 / 2 + e3 / 3
        return Jet3((mpmath.log(abs(b0)),) + s.c[1:])

    def __repr__(self):
        return "Jet3(" + ", ".join(mpmath.nstr(x, 12) for x in self.c) + ")"


def _zero_like(x):
    return 0


class Mat:
    """Dense truncation of an infinite matrix.

    ``window`` is the size of the leading block whose entries agree with the
    infinite object. ``lower``/``upper`` are bandwidths (entry (i, j) vanishes
    unless -lower <= j - i <= upper); INF means no band is known.
    """

    __slots__ = ("rows", "window", "lower", "upper")

    def __init__(self, rows, window=None, lower=INF, upper=INF):
        self.rows = [list(r) for r in rows]
        n = len(self.rows)
        self.window = n if window is None else min(window, n)
        self.lower = lower
        self.upper = upper

    @property
    def n(self):
        return len(self.rows)

    @property
    def shape(self):
        return (len(self.rows), len(self.rows[0]) if self.rows else 0)

    @classmethod
    def zeros(cls, n, window=None):
        return cls([[0] * n for _ in range(n)], window, 0, 0)

    @classmethod
    def identity(cls, n):
        return cls.diag([1] * n)

    @classmethod
    def diag(cls, values, window=None):
        n = len(values)
        rows = [[0] * n for _ in range(n)]
        for i, v in enumerate(values):
            rows[i][i] = v
        return cls(rows, window, 0, 0)

    @classmethod
    def from_function(cls, n, f, lower=INF, upper=INF, window=None):
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                row.append(f(i, j) if -lower <= j - i <= upper else 0)
            rows.append(row)
        return cls(rows, window, lower, upper)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def copy(self):
        return Mat(self.rows, self.window, self.lower, self.upper)

    def with_window(self, w):
        m = self.copy()
        m.window = min(self.window, w)
        return m

    def resized(self, n):
        """Leading n x n block (window clipped)."""
        return Mat([r[:n] for r in self.rows[:n]], min(self.window, n), self.lower, self.upper)

    @property
    def T(self):
        n = self.n
        return Mat([[self.rows[j][i] for j in range(n)] for i in range(n)],
                   self.window, self.upper, self.lower)

    def map(self, f):
        return Mat([[f(x) for x in r] for r in self.rows], self.window, self.lower, self.upper)

    def banded(self, lower, upper):
        """Copy with entries outside the band zeroed and the band recorded."""
        rows = [[x if -lower <= j - i <= upper else 0 for j, x in enumerate(r)] for i, r in enumerate(self.rows)]
        return Mat(rows, self.window, lower, upper)

    def values(self):
        return self.map(value_of)

    def slot(self, i, j):
        """Matrix of theta1^i theta2^j derivatives of a jet matrix."""
        return self.map(lambda x: x.d(i, j) if isinstance(x, Jet3) else (x if (i, j) == (0, 0) else 0))

    def theta(self, k=1):
        return self.map(lambda x: x.theta(k) if isinstance(x, Jet3) else (x if k == 0 else 0))

    def _combine(self, other, op):
        if not isinstance(other, Mat):
            raise TypeError("matrix expected")
        n = self.n
        if other.n != n:
            raise ValueError("size mismatch")
        rows = [[op(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(self.rows, other.rows)]
        return Mat(rows, min(self.window, other.window),
                   max(self.lower, other.lower), max(self.upper, other.upper))

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __neg__(self):
        return self.map(lambda x: -x)

    def scale(self, s):
        return self.map(lambda x: x * s)

    def __mul__(self, s):
        return self.scale(s)

    __rmul__ = __mul__

    def __matmul__(self, other):
        n = self.n
        if other.n != n:
            raise ValueError("size mismatch")
        A, B = self.rows, other.rows
        la, ua, lb, ub = self.lower, self.upper, other.lower, other.upper
        lower = min(INF, la + lb)
        upper = min(INF, ua + ub)
        rows = []
        for i in range(n):
            row = [0] * n
            Ai = A[i]
            jlo = max(0, i - lower) if lower < INF else 0
            jhi = min(n - 1, i + upper) if upper < INF else n - 1
            klo_a = max(0, i - la) if la < INF else 0
            khi_a = min(n - 1, i + ua) if ua < INF else n - 1
            for j in range(jlo, jhi + 1):
                klo = max(klo_a, j - ub) if ub < INF else klo_a
                khi = min(khi_a, j + lb) if lb < INF else khi_a
                acc = 0
                for k in range(klo, khi + 1):
                    a = Ai[k]
                    if a == 0:
                        continue
                    b = B[k][j]
                    if b == 0:
                        continue
                    acc = acc + a * b
                row[j] = acc
            rows.append(row)
        w = min(self.window, other.window)
        shrink = max(0, min(ua, lb))
        return Mat(rows, max(0, w - shrink) if shrink < INF else 0, lower, upper)

    def commutator(self, other):
        return self @ other - other @ self

    def max_abs(self, window=None, rows=None, cols=None):
        """Largest |value| over the valid window (or a caller-restricted block)."""
        w = self.window if window is None else min(window, self.window)
        r = w if rows is None else min(rows, w)
        c = w if cols is None else min(cols, w)
        best = mpf(0)
        for i in range(r):
            for j in range(c):
                v = magnitude(self.rows[i][j])
                if v > best:
                    best = v
        return best

    def band_excess(self, lower, upper, window=None):
        """Largest |entry| outside the band (lower, upper) inside the window."""
        w = self.window if window is None else min(window, self.window)
        best = mpf(0)
        for i in range(w):
            for j in range(w):
                if j - i > upper or i - j > lower:
                    v = magnitude(self.rows[i][j])
                    if v > best:
                        best = v
        return best

    def diagonal(self, k=0, length=None):
        """Entries (i, i+k) for i in the window."""
        w = self.window
        out = []
        for i in range(w):
            j = i + k
            if 0 <= j < w:
                out.append(self.rows[i][j])
        return out if length is None else out[:length]


# structural matrices

def shift(n):
    """Lambda: ones on the first superdiagonal."""
    return Mat.from_function(n, lambda i, j: 1 if j == i + 1 else 0, lower=-1, upper=1, window=n - 1)


def parity_identity(n, a):
    """I^(a): identity on indices congruent to a-1 mod 2."""
    return Mat.diag([1 if i % 2 == a - 1 else 0 for i in range(n)])


def index_diag(n, offset=1):
    """D = diag(offset, offset+1, ...)."""
    return Mat.diag([offset + i for i in range(n)])


def ldu(M, rtol=None, atol=0):
    """Pivot-free Doolittle sweep: M = L diag(D) U with L unit lower, U unit upper.

    Works over any ring supporting + - * / (mpf or Jet3). Raises BreakdownError
    with the index k of the first vanishing leading minor.
    """
    n = M.n
    rtol = tolerance(n) if rtol is None else rtol
    a = [list(r) for r in M.rows]
    L = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    D = []
    scale = mpf(0)
    for k in range(n):
        for j in range(k + 1):
            scale = max(scale, magnitude(a[k][j]), magnitude(a[j][k]))
        piv = a[k][k]
        if magnitude(piv) <= atol + rtol * scale:
            raise BreakdownError(k + 1)
        D.append(piv)
        inv = 1 / piv
        rowk = a[k]
        for j in range(k + 1, n):
            U[k][j] = rowk[j] * inv
        for i in range(k + 1, n):
            if a[i][k] == 0:
                continue
            l = a[i][k] * inv
            L[i][k] = l
            ai = a[i]
            for j in range(k + 1, n):
                if not (rowk[j] == 0):
                    ai[j] = ai[j] - l * rowk[j]
    return (Mat(L, n, INF, 0), D, Mat(U, n, 0, INF))


def leading_minors(M, rtol=None, atol=0):
    """d_0..d_n from one LDU sweep (d_{k+1} = d_k * pivot_k)."""
    _, D, _ = ldu(M, rtol, atol)
    out = [1]
    for p in D:
        out.append(out[-1] * p)
    return out


def unit_lower_inverse(L):
    n = L.n
    X = [[0] * n for _ in range(n)]
    for j in range(n):
        X[j][j] = 1
        for i in range(j + 1, n):
            acc = 0
            Li = L.rows[i]
            for k in range(j, i):
                if not (Li[k] == 0 or X[k][j] == 0):
                    acc = acc + Li[k] * X[k][j]
            X[i][j] = -acc
    return Mat(X, L.window, L.lower, 0)


class GaussBorel:
    """M = S^-1 H S~^-T with S, S~ unit lower triangular."""

    def __init__(self, M, rtol=None, atol=0):
        L, D, U = ldu(M, rtol, atol)
        n = M.n
        self.n = n
        self.S_inv = L
        self.St_inv = U.T
        self.H = D
        self.S = unit_lower_inverse(L)
        self.St = unit_lower_inverse(self.St_inv)
        minors = [1]
        for p in D:
            minors.append(minors[-1] * p)
        self.minors = minors

    def Hmat(self):
        return Mat.diag(self.H)

    def Hinv_mat(self):
        return Mat.diag([1 / h for h in self.H])

    def reconstruct(self):
        return self.S_inv @ self.Hmat() @ self.St_inv.T


def gauss_borel(M, rtol=None, atol=0):
    return GaussBorel(M, rtol, atol)


def det(rows):
    """Determinant by Gaussian elimination with partial pivoting (real entries)."""
    a = [list(map(mpf, r)) for r in rows]
    n = len(a)
    sign = 1
    result = mpf(1)
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        if a[p][k] == 0:
            return mpf(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            sign = -sign
        piv = a[k][k]
        result *= piv
        for i in range(k + 1, n):
            f = a[i][k] / piv
            if f:
                for j in range(k + 1, n):
                    a[i][j] -= f * a[k][j]
    return sign * result


def jet_eval(terms, budget=None, run=20, ratio_cap=0.5, max_terms=200000):
    """Sum a series of jets (or reals) with a per-slot geometric tail bound.

    Stops once ``run`` consecutive terms are below the budget (relative to the
    running sum) and the last term ratio is below ``ratio_cap``. Returns
    (sum, tail_bound, terms_used).
    """
    budget = mpf(2) ** (-(mp.prec + 32)) if budget is None else budget
    cap = to_real(ratio_cap) if not isinstance(ratio_cap, mpf) else ratio_cap
    acc = None
    prev = None
    quiet = 0
    count = 0
    for t in terms:
        count += 1
        tj = t if isinstance(t, Jet3) else Jet3.constant(mpf(t))
        acc = tj if acc is None else acc + tj
        size = max(abs(x) for x in tj.c)
        ref = max(mpf(1), max(abs(x) for x in acc.c))
        quiet = quiet + 1 if size <= budget * ref else 0
        ratio = size / prev if prev else (mpf(0) if size == 0 else mpf(1))
        prev = size
        if quiet >= run and ratio < cap:
            q = cap
            tail = Jet3(abs(x) * q / (1 - q) for x in tj.c)
            return acc, tail, count
        if count >= max_terms:
            break
    if acc is not None and count < max_terms:
        # finite series
        return acc, Jet3.constant(mpf(0)), count
    raise ConvergenceError("series did not meet the tail budget")
