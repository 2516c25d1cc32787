"""Discrete lattice equations in the hypergeometric parameters.

Three unit shifts act on a weight pair: ``hat`` raises b1[r], ``check`` raises
b2[q] and ``tilde`` lowers c[s]; ``bar`` advances the half-index n -> n+1 of the
fields u = H_2n, v = H_2n+1, f = S[1]_2n, g = S[1]_2n+1, F = S[2]_2n, G = S[2]_2n+1.
Fields come from the factorization of each shifted family. The tau-function
pipeline is evaluated separately and reconciled with it.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpf

from .lfmatrix import connection_matrices
from .mops import factorization
from .numkernel import magnitude, to_real
from .tau import tau_assoc, tau_values
from .weights import FamilyError, shift_datum, shift_params

LETTERS = {"h": "hat", "c": "check", "t": "tilde"}
_KINDS = {"h": "b1+1", "c": "b2+1", "t": "c-1"}


@dataclass(frozen=True)
class ShiftSpec:
    """Which parameter each shift moves: b1[hat], b2[check], c[tilde]."""

    hat: int = 0
    check: int = 0
    tilde: int = 0

    def index(self, letter):
        return {"h": self.hat, "c": self.check, "t": self.tilde}[letter]

    def data(self, family):
        """The scalars d-hat = b1[r], d-check = b2[q], d-tilde = c[s] - 1 that exist."""
        out = {}
        for letter, kind in _KINDS.items():
            try:
                out[letter] = to_real(shift_datum(family, kind, self.index(letter)))
            except (FamilyError, IndexError):
                pass
        return out


def _canon(word):
    return "".join(sorted(word))


def apply_shifts(family, word, spec=ShiftSpec()):
    """Family after the shifts named by the letters of ``word`` (any order)."""
    out = family
    for letter in _canon(word):
        try:
            out = shift_params(out, _KINDS[letter], spec.index(letter))
        except FamilyError as exc:
            raise FamilyError(f"shift {LETTERS[letter]} at multi-index {_canon(word) or '-'}: {exc}") from exc
    return out


def shift_grid(family, spec=ShiftSpec(), words=("", "h", "c", "t", "ht", "ct", "ch")):
    """Map from canonical shift words to families."""
    return {_canon(w): apply_shifts(family, w, spec) for w in words}


@dataclass
class LatticeFields:
    """Half-site fields of one family, n = 0..n_max."""

    family: object
    u: list
    v: list
    f: list
    g: list
    F: list
    G: list

    @property
    def n_max(self):
        return len(self.u) - 1

    def get(self, name, n):
        return getattr(self, name)[n]


_FIELDS = {}


def lattice_fields(family, n_max, hankel=False):
    """Fields from H and the first two subdiagonals of S.

    With ``hankel`` the single-weight factorization is used and only u is
    meaningful (u = H_n, no parity split).
    """
    key = (family.key(), n_max, hankel, mp.prec)
    lf = _FIELDS.get(key)
    if lf is not None:
        return lf
    if hankel:
        fz = factorization(family, n_max + 1, hankel=True)
        lf = LatticeFields(family, list(fz.H), [], [], [], [], [])
    else:
        fz = factorization(family, 2 * n_max + 4)
        S, H = fz.S, fz.H
        r = range(n_max + 1)
        lf = LatticeFields(family,
                           [H[2 * n] for n in r], [H[2 * n + 1] for n in r],
                           [S[2 * n + 1, 2 * n] for n in r], [S[2 * n + 2, 2 * n + 1] for n in r],
                           [S[2 * n + 2, 2 * n] for n in r], [S[2 * n + 3, 2 * n + 1] for n in r])
    _FIELDS[key] = lf
    return lf


class Site:
    """Field accessor at half-site n: ``s.u("ht", 1)`` is u shifted by hat,
    tilde and one bar."""

    def __init__(self, family, n, spec=ShiftSpec(), bars=2, hankel=False):
        self.family = family
        self.n = n
        self.spec = spec
        self.bars = bars
        self.hankel = hankel
        self.d = spec.data(family)
        self._fields = {}

    def fields(self, word):
        word = _canon(word)
        lf = self._fields.get(word)
        if lf is None:
            lf = lattice_fields(apply_shifts(self.family, word, self.spec), self.n + self.bars, self.hankel)
            self._fields[word] = lf
        return lf

    def _at(self, name, word, bar):
        return self.fields(word).get(name, self.n + bar)

    def u(self, w="", k=0):
        return self._at("u", w, k)

    def v(self, w="", k=0):
        return self._at("v", w, k)

    def f(self, w="", k=0):
        return self._at("f", w, k)

    def g(self, w="", k=0):
        return self._at("g", w, k)

    def F(self, w="", k=0):
        return self._at("F", w, k)

    def G(self, w="", k=0):
        return self._at("G", w, k)


def _residual(lhs, rhs):
    """|sum lhs - sum rhs| relative to the largest single term."""
    terms = list(lhs) + list(rhs)
    big = max([magnitude(t) for t in terms] + [mpf(0)])
    r = magnitude(sum(lhs) - sum(rhs))
    return r / big if big > 0 else r


# three-shift systems; each equation returns (lhs terms, rhs terms)

def _system_hat_tilde(s):
    u, v, f, g = s.u, s.v, s.f, s.g
    dh, dt = s.d["h"], s.d["t"]
    return {
        1: ([g() * (f("t") - f("h")), g("t") * (f("ht") - f("t")), g("h") * (f("h") - f("ht"))],
            [(u("h", 1) / u("ht") - u("", 1) / u("t")) / dt, (u("", 1) / u("h") - u("t", 1) / u("ht")) / dh]),
        2: ([f("", 1) * (g("h") - g("t")), f("t", 1) * (g("t") - g("ht")), f("h", 1) * (g("ht") - g("h"))],
            [(v("", 1) / v("t") - v("h", 1) / v("ht")) / dt]),
        3: ([u("h", 1) / u("ht") * (f("h", 1) - f("", 1)) / dt, u("t", 1) / u("ht") * (f("", 1) - f("t", 1)) / dh,
             v("", 1) / v("t") * (f("t") - f("ht")) / dt], []),
        4: ([u("", 2) / u("h", 1) * (g("h") - g("ht")) / dh, u("", 2) / u("t", 1) * (g("ht") - g("t")) / dt,
             v("h", 1) / v("ht") * (g("", 1) - g("h", 1)) / dt], []),
    }


def _system_check_tilde(s):
    u, v, f, g = s.u, s.v, s.f, s.g
    dc, dt = s.d["c"], s.d["t"]
    return {
        1: ([g() * (f("t") - f("c")), g("t") * (f("ct") - f("t")), g("c") * (f("c") - f("ct"))],
            [(u("c", 1) / u("ct") - u("", 1) / u("t")) / dt]),
        2: ([f("", 1) * (g("t") - g("c")), f("t", 1) * (g("ct") - g("t")), f("c", 1) * (g("c") - g("ct"))],
            [(v("c", 1) / v("ct") - v("", 1) / v("t")) / dt, (v("", 1) / v("c") - v("t", 1) / v("ct")) / dc]),
        3: ([u("c", 1) / u("ct") * (f("", 1) - f("c", 1)) / dt, v("", 1) / v("c") * (f("c") - f("ct")) / dc,
             v("", 1) / v("t") * (f("ct") - f("t")) / dt], []),
        4: ([u("", 2) / u("t", 1) * (g("t") - g("ct")) / dt, v("t", 1) / v("ct") * (g("", 1) - g("t", 1)) / dc,
             v("c", 1) / v("ct") * (g("c", 1) - g("", 1)) / dt], []),
    }


def _system_hat_check(s):
    u, v, f, g = s.u, s.v, s.f, s.g
    dh, dc = s.d["h"], s.d["c"]
    return {
        1: ([u("c", 1) / u("ch") * (f("", 1) - f("c", 1)) / dh, v("", 1) / v("c") * (f("c") - f("ch")) / dc], []),
        2: ([u("", 2) / u("h", 1) * (g("ch") - g("h")) / dh, v("h", 1) / v("ch") * (g("h", 1) - g("", 1)) / dc], []),
        3: ([g() * (f("c") - f("h")), g("c") * (f("ch") - f("c")), g("h") * (f("h") - f("ch"))],
            [(u("", 1) / u("h") - u("c", 1) / u("ch")) / dh]),
        4: ([f("", 1) * (g("c") - g("h")), f("c", 1) * (g("ch") - g("c")), f("h", 1) * (g("h") - g("ch"))],
            [(v("h", 1) / v("ch") - v("", 1) / v("c")) / dc]),
    }


SYSTEMS_3D = {
    "hat-tilde-bar": ("ht", _system_hat_tilde),
    "check-tilde-bar": ("ct", _system_check_tilde),
    "hat-check-bar": ("ch", _system_hat_check),
}


def _available(family, letters):
    have = {"h": bool(family.b1), "c": bool(family.b2), "t": bool(family.c)}
    return all(have[x] for x in letters)


def nc3d_residuals(family, n, spec=ShiftSpec(), systems=None):
    """Residuals of the three-shift systems at half-site n, keyed (system, equation).

    Systems whose shifts the family does not carry are skipped.
    """
    out = {}
    site = Site(family, n, spec)
    for name, (letters, build) in SYSTEMS_3D.items():
        if systems is not None and name not in systems:
            continue
        if not _available(family, letters):
            continue
        for k, (lhs, rhs) in build(site).items():
            out[(name, k)] = _residual(lhs, rhs)
    return out


# two-shift systems (one parameter shift plus bar)

def _q(s, w, k=0):
    """F - G - g (g - f-bar), at shift word w and bar k."""
    return s.F(w, k) - s.G(w, k) - s.g(w, k) * (s.g(w, k) - s.f(w, k + 1))


def _p(s, w, k=0):
    """G - F-bar - f-bar (f-bar - g-bar)."""
    return s.G(w, k) - s.F(w, k + 1) - s.f(w, k + 1) * (s.f(w, k + 1) - s.g(w, k + 1))


def _system_tilde(s, variant="identity"):
    u, v, f, g, F, G = s.u, s.v, s.f, s.g, s.F, s.G
    d = s.d["t"]
    t = "t"
    fifth = (f("", 2) - f(t, 2)) if variant == "identity" else (f("", 1) - f(t, 1))
    return {
        1: ([d * (G() - F("", 1) + F(t, 1) - G(t)), d * f(t, 1) * (g("", 1) - g(t, 1)), d * g(t) * (f(t, 1) - f("", 1))],
            [v("", 1) / v(t), -u("", 2) / u(t, 1)]),
        2: ([d * (F() - G() + G(t) - F(t)), d * g(t) * (f("", 1) - f(t, 1)), d * f(t) * (g(t) - g())],
            [u("", 1) / u(t), -v("", 1) / v(t)]),
        3: ([u("", 2) / u(t, 1) * (g(t) - f(t, 1)), d * (g("", 1) - g(t, 1)) * _p(s, t), d * u(t, 2) / u(t, 1)],
            [d * u("", 2) / u("", 1), u("", 2) / u(t, 1) * (g("", 1) - f("", 2)), d * (f("", 1) - f(t, 1)) * _q(s, "", 1)]),
        4: ([v("", 1) / v(t) * (f(t) - g(t)), d * (f("", 1) - f(t, 1)) * _q(s, t), d * v(t, 1) / v(t)],
            [d * v("", 1) / v(), v("", 1) / v(t) * (f("", 1) - g("", 1)), d * (g() - g(t)) * _p(s, "")]),
        5: ([v("", 2) / v(t, 1) * _p(s, t), d * u(t, 2) / u(t, 1) * fifth],
            [d * v("", 2) / v("", 1) * (f("", 1) - f(t, 1)), u("", 2) / u(t, 1) * _p(s, "", 1)]),
        6: ([u("", 2) / u(t, 1) * _q(s, t), d * v(t, 1) / v(t) * (g("", 1) - g(t, 1))],
            [d * u("", 2) / u("", 1) * (g() - g(t)), v("", 1) / v(t) * _q(s, "", 1)]),
    }


def _system_check(s, variant="identity"):
    u, v, f, g, F, G = s.u, s.v, s.f, s.g, s.F, s.G
    d = s.d["c"]
    c = "c"
    return {
        1: ([v("", 1) / v(c)],
            [d * (G() - F("", 1) - G(c) + F(c, 1)), d * f(c, 1) * (g("", 1) - g(c, 1)), d * g(c) * (f(c, 1) - f("", 1))]),
        2: ([d * (F() - G() - F(c) + G(c)), d * g(c) * (f("", 1) - f(c, 1)), d * f(c) * (g(c) - g())],
            [-v("", 1) / v(c)]),
        3: ([u(c, 2) / u(c, 1), (g("", 1) - g(c, 1)) * _p(s, c)],
            [u("", 2) / u("", 1), (f("", 1) - f(c, 1)) * _q(s, "", 1)]),
        4: ([v("", 1) / v(c) * (f(c) - g(c)), d * (f("", 1) - f(c, 1)) * _q(s, c), d * v(c, 1) / v(c)],
            [d * v("", 1) / v(), d * (g() - g(c)) * _p(s, ""), v("", 1) / v(c) * (f("", 1) - g("", 1))]),
        5: ([v("", 2) / v(c, 1) * _p(s, c), d * u(c, 2) / u(c, 1) * (f("", 2) - f(c, 2))],
            [d * v("", 2) / v("", 1) * (f("", 1) - f(c, 1))]),
        6: ([d * v(c, 1) / v(c) * (g("", 1) - g(c, 1))],
            [d * u("", 2) / u("", 1) * (g() - g(c)), v("", 1) / v(c) * _q(s, "", 1)]),
    }


def _system_hat(s, variant="identity"):
    u, v, f, g, F, G = s.u, s.v, s.f, s.g, s.F, s.G
    d = s.d["h"]
    h = "h"
    second_F = F(h) if variant == "identity" else F(h, 1)
    sixth = u("", 2) / u(h, 1) if variant == "identity" else v("", 1) / v(h)
    return {
        1: ([d * (G() - F("", 1) - G(h) + F(h, 1)), d * g(h) * (f(h, 1) - f("", 1)), d * f(h, 1) * (g("", 1) - g(h, 1))],
            [-u("", 2) / u(h, 1)]),
        2: ([d * (F() - G() - second_F + G(h)), d * f(h) * (g(h) - g()), d * g(h) * (f("", 1) - f(h, 1))],
            [u("", 1) / u(h)]),
        3: ([d * u(h, 2) / u(h, 1), d * (g("", 1) - g(h, 1)) * _p(s, h), u("", 2) / u(h, 1) * (g(h) - f(h, 1))],
            [u("", 2) / u(h, 1) * (g("", 1) - f("", 2)), d * u("", 2) / u("", 1), d * (f("", 1) - f(h, 1)) * _q(s, "", 1)]),
        4: ([v(h, 1) / v(h), (f("", 1) - f(h, 1)) * _q(s, h)],
            [v("", 1) / v(), (g() - g(h)) * _p(s, "")]),
        5: ([d * u(h, 1) / u(h) * (f("", 1) - f(h, 1))],
            [d * v("", 1) / v() * (f() - f(h)), u("", 1) / u(h) * _p(s, "")]),
        6: ([sixth * _q(s, h), d * v(h, 1) / v(h) * (g("", 1) - g(h, 1))],
            [d * u("", 2) / u("", 1) * (g() - g(h))]),
    }


SYSTEMS_2D = {
    "tilde-bar": ("t", _system_tilde),
    "check-bar": ("c", _system_check),
    "hat-bar": ("h", _system_hat),
}

# equations whose literal display differs from the identity by one symbol
LITERAL_DIFFERS = {("tilde-bar", 5), ("hat-bar", 2), ("hat-bar", 6)}


def nc2d_residuals(family, n, which, spec=ShiftSpec(), variant="identity"):
    """Residuals of the six equations of one shift-plus-bar system at half-site n.

    ``variant="literal"`` swaps in the one-symbol alternatives listed in
    ``LITERAL_DIFFERS``, which do not hold.
    """
    letters, build = SYSTEMS_2D[which]
    if not _available(family, letters):
        raise FamilyError(f"{which} needs the {LETTERS[letters]} shift, which {family.describe()} lacks")
    site = Site(family, n, spec)
    return {k: _residual(lhs, rhs) for k, (lhs, rhs) in build(site, variant).items()}


# tau-function pipeline

def reconcile_tau_maps(family, n_max=6, signs=(1, -1), offsets=(0, 1, 2)):
    """Find (sign, offset) with S[j]_k = sign * tau^j_{k+offset} / tau_{k+offset}, j = 1, 2.

    Returns {j: (sign, offset, max relative deviation)} for the best candidate.
    """
    fz = factorization(family, n_max + 3)
    taus = tau_values(family, n_max + 5)
    best = {}
    for j in (1, 2):
        scores = []
        for sign in signs:
            for off in offsets:
                dev = mpf(0)
                for k in range(n_max + 1):
                    m = k + off
                    ref = fz.S[k + j, k]
                    cand = sign * tau_assoc(family, m, j, boundary_zero=True) / taus[m] if m >= 1 else mpf(0)
                    dev = max(dev, abs(cand - ref) / max(abs(ref), mpf(10) ** -30))
                scores.append((dev, sign, off))
        dev, sign, off = min(scores, key=lambda t: t[0])
        best[j] = (sign, off, dev)
    return best


class TauSite:
    """u, v, f, g of a shifted family from tau and tau^1 under a sign/offset map."""

    def __init__(self, family, n, spec=ShiftSpec(), sign=-1, offset=1):
        self.family, self.n, self.spec = family, n, spec
        self.sign, self.offset = sign, offset
        self.d = spec.data(family)
        self._cache = {}

    def _taus(self, word):
        word = _canon(word)
        data = self._cache.get(word)
        if data is None:
            fam = apply_shifts(self.family, word, self.spec)
            top = 2 * self.n + 6 + self.offset
            taus = tau_values(fam, top)
            data = (taus, {}, fam)
            self._cache[word] = data
        return data

    def tau(self, word, k):
        return self._taus(word)[0][k]

    def tau1(self, word, k):
        taus, t1, fam = self._taus(word)
        if k not in t1:
            t1[k] = tau_assoc(fam, k, 1, boundary_zero=True) if k >= 1 else mpf(0)
        return t1[k]

    def u(self, w="", k=0):
        m = 2 * (self.n + k)
        return self.tau(w, m + 1) / self.tau(w, m)

    def v(self, w="", k=0):
        m = 2 * (self.n + k) + 1
        return self.tau(w, m + 1) / self.tau(w, m)

    def _ratio(self, w, m):
        m += self.offset
        return self.sign * self.tau1(w, m) / self.tau(w, m)

    def f(self, w="", k=0):
        return self._ratio(w, 2 * (self.n + k))

    def g(self, w="", k=0):
        return self._ratio(w, 2 * (self.n + k) + 1)


def _tau_form(s, variant="identity"):
    """The four tau-form equations for the hat-tilde-bar system."""
    u, v, f, g = s.u, s.v, s.f, s.g
    dh, dt = s.d["h"], s.d["t"]
    first2 = f("", 1) * (g("t") - g("h")) if variant == "identity" else f("", 1) * (g("t") + g("h"))
    fourth = v("h", 1) / v("ht") if variant == "identity" else u("t", 1) / u("ht")
    return {
        1: ([g() * (f("t") - f("h")), g("t") * (f("ht") - f("t")), g("h") * (f("h") - f("ht"))],
            [(u("h", 1) / u("ht") - u("", 1) / u("t")) / dt, (u("", 1) / u("h") - u("t", 1) / u("ht")) / dh]),
        2: ([first2, f("t", 1) * (g("ht") - g("t")), f("h", 1) * (g("h") - g("ht"))],
            [(v("h", 1) / v("ht") - v("", 1) / v("t")) / dt]),
        3: ([u("h", 1) / u("ht") * (f("h", 1) - f("", 1)) / dt, u("t", 1) / u("ht") * (f("", 1) - f("t", 1)) / dh,
             v("", 1) / v("t") * (f("t") - f("ht")) / dt], []),
        4: ([u("", 2) / u("h", 1) * (g("h") - g("ht")) / dh, u("", 2) / u("t", 1) * (g("ht") - g("t")) / dt,
             fourth / dt * (g("", 1) - g("h", 1))], []),
    }


def nc_tau_residuals(family, n, spec=ShiftSpec(), sign=None, offset=None, variant="identity"):
    """Four tau-form residuals at half-site n plus the sign/offset map used.

    When the map is not given it is detected by ``reconcile_tau_maps`` on the
    base family and applied uniformly to every shifted family.
    """
    if sign is None or offset is None:
        sign, offset, _ = reconcile_tau_maps(family, 2 * n + 4)[1]
    site = TauSite(family, n, spec, sign, offset)
    res = {k: _residual(lhs, rhs) for k, (lhs, rhs) in _tau_form(site, variant).items()}
    return res, (sign, offset)


def tau_field_agreement(family, n, spec=ShiftSpec(), sign=-1, offset=1):
    """Largest relative gap between factorization fields and tau-pipeline fields
    over the families of the hat-tilde-bar system."""
    s, t = Site(family, n, spec, bars=1), TauSite(family, n, spec, sign, offset)
    worst = mpf(0)
    for w in ("", "h", "t", "ht"):
        for name in ("u", "v", "f", "g"):
            for k in (0, 1):
                a, b = getattr(s, name)(w, k), getattr(t, name)(w, k)
                worst = max(worst, abs(a - b) / max(abs(a), mpf(10) ** -30))
    return worst


# scalar reduction on one weight

def scalar_nc_residual(family, n, spec=ShiftSpec(), weighted=True):
    """(1/d~)(u-bar-hat/u-hat-tilde - u-bar/u~) + (1/d^)(u-bar/u^ - u-bar-tilde/u-hat-tilde) = 0
    for u = H_n of the first weight alone (bar: n -> n+1).

    ``weighted=False`` drops the 1/d factors.
    """
    s = Site(family, n, spec, bars=1, hankel=True)
    u = s.u
    dh, dt = (s.d["h"], s.d["t"]) if weighted else (1, 1)
    terms = [u("h", 1) / u("ht") / dt, -u("", 1) / u("t") / dt, u("", 1) / u("h") / dh, -u("t", 1) / u("ht") / dh]
    return _residual(terms, [])


# matrix-level compatibilities

def _connection(family, letter, n, spec):
    return connection_matrices(family, _KINDS[letter], n, spec.index(letter))


def shift_compat_residuals(family, n, spec=ShiftSpec()):
    """Omega products around each elementary square and T'^T omega = omega T^T per shift."""
    out = {}
    letters = [x for x in "hct" if _available(family, x)]
    for a, b in (("t", "h"), ("t", "c"), ("h", "c")):
        if a not in letters or b not in letters:
            continue
        fa = apply_shifts(family, a, spec)
        fb = apply_shifts(family, b, spec)
        left = _connection(family, a, n, spec).Omega @ _connection(fa, b, n, spec).Omega
        right = _connection(family, b, n, spec).Omega @ _connection(fb, a, n, spec).Omega
        scale = max(mpf(1), left.max_abs())
        out[f"Omega {LETTERS[a]}-{LETTERS[b]} square"] = (left - right).max_abs() / scale
    T = factorization(family, n).T.banded(2, 1)
    for x in letters:
        cd = _connection(family, x, n, spec)
        Ts = factorization(apply_shifts(family, x, spec), n).T.banded(2, 1)
        w = cd.omega.banded(0, 2)
        R = Ts.T @ w - w @ T.T
        scale = max(mpf(1), w.max_abs())
        out[f"T^T omega intertwining ({LETTERS[x]})"] = R.max_abs() / scale
    return out


def band_excess_report(family, n, spec=ShiftSpec()):
    """Mass clipped by the band projections used in ``shift_compat_residuals``."""
    out = {"T": factorization(family, n).T.band_excess(2, 1)}
    for x in "hct":
        if _available(family, x):
            out[f"omega ({LETTERS[x]})"] = _connection(family, x, n, spec).omega.band_excess(0, 2)
    return out
