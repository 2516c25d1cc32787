"""Hypergeometric weight pairs, their moments, and contiguity shifts of the parameters."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

from mpmath import mp, mpf

from .numkernel import ConvergenceError, Jet3, jet_eval, to_real


class FamilyError(ValueError):
    """Parameters outside the convergence or pole guards."""


def rational(x):
    """Parse an exact rational from int, Fraction, 'p/q' or a decimal string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10**12)
    if isinstance(x, str):
        s = x.strip()
        if s.count("/") > 1 or s.startswith("/") or s.endswith("/"):
            raise FamilyError(f"malformed rational {x!r}")
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise FamilyError(f"malformed rational {x!r}") from exc
    raise FamilyError(f"cannot read a rational from {x!r}")


def _is_pole(c):
    return c.denominator == 1 and c <= 0


@dataclass(frozen=True)
class WeightFamily:
    """Two weights w_a(k) = prod (b_a)_k / prod (c)_k * eta_a^k / k!.

    ``c`` are the shifted roots of theta(z) = z prod (z + c_j - 1); the weights
    are tied to theta and sigma_a(z) = eta_a prod (z + b_a) by the discrete
    Pearson equation.
    """

    c: tuple = ()
    b1: tuple = ()
    b2: tuple = ()
    eta1: Fraction = Fraction(1, 2)
    eta2: Fraction = Fraction(1, 3)
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        for attr in ("c", "b1", "b2"):
            object.__setattr__(self, attr, tuple(rational(v) for v in getattr(self, attr)))
        for attr in ("eta1", "eta2"):
            object.__setattr__(self, attr, rational(getattr(self, attr)))
        self.check()

    def check(self):
        for a in (1, 2):
            eta = self.eta(a)
            if eta <= 0:
                raise FamilyError(f"eta{a} must be positive")
            m = len(self.b(a))
            if m > self.N + 1:
                raise FamilyError(f"weight {a}: series diverges (more numerator than denominator parameters)")
            if m == self.N + 1 and eta >= 1:
                raise FamilyError(f"weight {a}: series needs eta < 1")
        for cj in self.c:
            if _is_pole(cj):
                raise FamilyError(f"c = {cj} hits a pole of the weight")

    @property
    def N(self):
        return len(self.c)

    def M(self, a):
        return len(self.b(a))

    def b(self, a):
        return self.b1 if a == 1 else self.b2

    def eta(self, a):
        return self.eta1 if a == 1 else self.eta2

    @property
    def deg_theta(self):
        return self.N + 1

    def deg_sigma(self, a=None):
        if a is None:
            return max(self.M(1), self.M(2))
        return self.M(a)

    @property
    def at_pattern(self):
        """Which AT-system pattern the parameters fit, or 'unverified'."""
        positive = all(x > 0 for x in self.c + self.b1 + self.b2)
        if not positive:
            return "unverified"
        if sorted(self.b1) == sorted(self.b2) and self.eta1 != self.eta2:
            return "distinct-eta"
        if self.eta1 == self.eta2 and self.M(1) == self.M(2) and self.M(1) >= 1:
            r1, r2 = list(self.b1), list(self.b2)
            for x in list(r1):
                if x in r2:
                    r1.remove(x)
                    r2.remove(x)
            if len(r1) == 1 and r1 != r2:
                return "distinct-b"
        return "unverified"

    def key(self):
        """Canonical parameter key (order of roots is irrelevant)."""
        return (tuple(sorted(self.c)), tuple(sorted(self.b1)), tuple(sorted(self.b2)),
                self.eta1, self.eta2)

    def theta_coeffs(self):
        """Ascending coefficients of theta(z) = z prod (z + c_j - 1)."""
        poly = [Fraction(0), Fraction(1)]
        for cj in self.c:
            poly = _poly_mul_linear(poly, cj - 1)
        return poly

    def sigma_coeffs(self, a):
        poly = [Fraction(1)]
        for bi in self.b(a):
            poly = _poly_mul_linear(poly, bi)
        return [self.eta(a) * p for p in poly]

    def swapped(self):
        return replace(self, b1=self.b2, b2=self.b1, eta1=self.eta2, eta2=self.eta1,
                       name=self.name + "-swapped")

    def describe(self):
        def fmt(t):
            return "(" + ",".join(str(x) for x in t) + ")"
        return (f"{self.name}: c={fmt(self.c)} b1={fmt(self.b1)} b2={fmt(self.b2)} "
                f"eta1={self.eta1} eta2={self.eta2}")


def _poly_mul_linear(poly, shift):
    """poly(z) * (z + shift), ascending coefficients."""
    out = [Fraction(0)] * (len(poly) + 1)
    for i, p in enumerate(poly):
        out[i] += p * shift
        out[i + 1] += p
    return out


def poly_eval(coeffs, z):
    acc = 0
    for c in reversed(coeffs):
        acc = acc * z + (to_real(c) if isinstance(c, Fraction) else c)
    return acc


def charlier(eta1=Fraction(1, 2), eta2=Fraction(1, 3)):
    return WeightFamily((), (), (), eta1, eta2, name="charlier")


def meixner2(eta=Fraction(1, 2), b1=Fraction(1), b2=Fraction(1, 2)):
    return WeightFamily((), (b1,), (b2,), eta, eta, name="meixner2")


def gen_charlier(eta1=Fraction(1, 2), eta2=Fraction(1, 3), c=Fraction(1, 2)):
    """Weights 1/(c+1)_k eta^k/k!, i.e. theta(k) = k(k+c)."""
    return WeightFamily((rational(c) + 1,), (), (), eta1, eta2, name="gen-charlier")


def gen_meixner2(eta=Fraction(1, 2), b1=Fraction(1), b2=Fraction(1, 2), c=Fraction(3, 2)):
    return WeightFamily((rational(c) + 1,), (b1,), (b2,), eta, eta, name="gen-meixner2")


FX_C = charlier()
FX_M = meixner2()
FX_GC = gen_charlier()
FX_GM = gen_meixner2()
FIXTURES = {"FX-C": FX_C, "FX-M": FX_M, "FX-GC": FX_GC, "FX-GM": FX_GM}


def pochhammer(b, k):
    b = to_real(b) if isinstance(b, (Fraction, str)) else b
    acc = mpf(1)
    for i in range(k):
        acc *= b + i
    return acc


def _limit_ratio(nb, nc, eta):
    if nb > nc + 1:
        raise ConvergenceError("more numerator than denominator parameters")
    if nb == nc + 1:
        if eta >= 1:
            raise ConvergenceError("eta >= 1 with balanced parameters")
        return eta
    return 0


def ratio_cap(limit):
    return max(mpf(1) / 2, (1 + to_real(limit)) / 2)


def pfq_eval(b, c, eta):
    """Generalized hypergeometric series at eta; returns (value, tail bound)."""
    b = [rational(x) for x in b]
    c = [rational(x) for x in c]
    eta = rational(eta)
    cap = ratio_cap(_limit_ratio(len(b), len(c), eta))
    bb = [to_real(x) for x in b]
    cc = [to_real(x) for x in c]
    e = to_real(eta)

    def terms():
        t = mpf(1)
        k = 0
        while True:
            yield t
            num = e
            for x in bb:
                num *= x + k
            den = mpf(k + 1)
            for x in cc:
                den *= x + k
            if num == 0:
                return
            t = t * num / den
            k += 1

    total, tail, _ = jet_eval(terms(), ratio_cap=cap)
    return total.value, tail.value


def weight_eval(family, a, k):
    num = mpf(1)
    for bi in family.b(a):
        num *= pochhammer(bi, k)
    den = mpf(1)
    for cj in family.c:
        p = pochhammer(cj, k)
        if p == 0:
            raise FamilyError(f"pole: (c)_k vanishes for c = {cj}")
        den *= p
    return num / den * to_real(family.eta(a)) ** k / math.factorial(k)


def pearson_residual(family, a, k):
    theta = poly_eval(family.theta_coeffs(), mpf(k + 1))
    sigma = poly_eval(family.sigma_coeffs(a), mpf(k))
    return theta * weight_eval(family, a, k + 1) - sigma * weight_eval(family, a, k)


def _weight_stream(family, a):
    """Yields w_a(0), w_a(1), ... by the term ratio."""
    bb = [to_real(x) for x in family.b(a)]
    cc = [to_real(x) for x in family.c]
    e = to_real(family.eta(a))
    w = mpf(1)
    k = 0
    while True:
        yield k, w
        num = e
        for x in bb:
            num *= x + k
        den = mpf(k + 1)
        for x in cc:
            den *= x + k
        w = w * num / den
        k += 1
        if w == 0:
            yield k, w
            return


def _moment_jet(values, a):
    """Jet of rho_n from rho_n..rho_{n+3} (theta_a bumps n, the other direction is zero)."""
    derivs = {}
    for i in range(4):
        derivs[(i, 0) if a == 1 else (0, i)] = values[i]
    return Jet3.from_derivatives(derivs)


def moment(family, a, n):
    """rho^(a)_n = sum_k k^n w_a(k) as a jet, via a termwise series."""
    cap = ratio_cap(_limit_ratio(family.M(a), family.N, family.eta(a)))

    def terms():
        for k, w in _weight_stream(family, a):
            kk = mpf(k)
            p = kk ** n * w if n else w
            vals = [p, p * kk, p * kk * kk, p * kk * kk * kk]
            yield _moment_jet(vals, a)

    total, _, _ = jet_eval(terms(), ratio_cap=cap)
    return total


class MomentTable:
    """rho^(a)_n for n <= n_max + 3 (so jets to order 3 are available up to n_max)."""

    def __init__(self, family, n_max, run=20):
        self.family = family
        self.n_max = n_max
        self.precision = mp.prec
        top = n_max + 3
        budget = mpf(2) ** (-(mp.prec + 32))
        self.values = {}
        self.tail = {}
        self.terms = {}
        for a in (1, 2):
            cap = ratio_cap(_limit_ratio(family.M(a), family.N, family.eta(a)))
            sums = [mpf(0)] * (top + 1)
            last = [mpf(0)] * (top + 1)
            prev = [None] * (top + 1)
            quiet = [0] * (top + 1)
            ratio_ok = [False] * (top + 1)
            count = 0
            for k, w in _weight_stream(family, a):
                count += 1
                kk = mpf(k)
                t = w
                for n in range(top + 1):
                    if n:
                        t = t * kk
                    sums[n] += t
                    at = abs(t)
                    quiet[n] = quiet[n] + 1 if at <= budget * max(1, abs(sums[n])) else 0
                    ratio_ok[n] = prev[n] is not None and prev[n] > 0 and at / prev[n] < cap
                    prev[n] = at
                    last[n] = at
                if w == 0:
                    break
                if all(q >= run for q in quiet) and all(ratio_ok):
                    break
                if count > 500000:
                    raise ConvergenceError("moment series did not settle")
            self.values[a] = sums
            self.tail[a] = [l * cap / (1 - cap) for l in last]
            self.terms[a] = count

    def rho(self, a, n):
        return self.values[a][n]

    def jet(self, a, n):
        v = self.values[a]
        return _moment_jet([v[n], v[n + 1], v[n + 2], v[n + 3]], a)


_TABLES = {}


def moment_table(family, n_max):
    """Cached table, reused when a larger one at the same precision exists."""
    key = (family.key(), mp.prec)
    tab = _TABLES.get(key)
    if tab is None or tab.n_max < n_max:
        tab = MomentTable(family, max(n_max, 8))
        _TABLES[key] = tab
    return tab


SHIFT_KINDS = ("b1+1", "b2+1", "c+1", "c-1")


def shift_params(family, kind, index=0):
    """Return the family with one parameter moved by one unit."""
    if kind in ("b1+1", "b2+1"):
        a = 1 if kind == "b1+1" else 2
        b = list(family.b(a))
        if not b:
            raise FamilyError(f"no b parameters on weight {a}")
        if not 0 <= index < len(b):
            raise FamilyError(f"b index {index} out of range")
        b[index] += 1
        return replace(family, **{f"b{a}": tuple(b)})
    if kind in ("c+1", "c-1"):
        c = list(family.c)
        if not c:
            raise FamilyError("no c parameters")
        if not 0 <= index < len(c):
            raise FamilyError(f"c index {index} out of range")
        c[index] += 1 if kind == "c+1" else -1
        return replace(family, c=tuple(c))
    raise FamilyError(f"unknown shift {kind!r}")


def shift_datum(family, kind, index=0):
    """The scalar d attached to a shift: b for a b-shift, c - 1 for c -> c - 1."""
    if kind == "b1+1":
        return family.b1[index]
    if kind == "b2+1":
        return family.b2[index]
    if kind == "c-1":
        return family.c[index] - 1
    raise FamilyError(f"no connection datum for {kind!r}")
