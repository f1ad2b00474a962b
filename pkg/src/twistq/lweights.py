"""l-weights in factored form and truncated q-character rings.

An l-weight over a folding datum stores, for every orbit representative i,
the rational function

    Psi_i(u) = q**c_i * prod_b (1 - b u)**m_b

with each root b a point q**(n/2) * zeta_6**m of the spectral lattice.  The
functions at the other nodes of an orbit are determined by
Psi_{sigma^k(i)}(u) = Psi_i(omega^k u), so they are never stored.

A sixth root of unity is used for every type (it contains both -1 and the
cube roots of unity), which keeps parameters of different types comparable.
"""
from __future__ import annotations

import re
from collections import defaultdict
from fractions import Fraction
from typing import NamedTuple

from .field_kernel import CycloRational
from .root_data import FoldingDatum, build_type

L = 6


class SpectralParam(NamedTuple):
    """The lattice point q**(n/2) * zeta_6**m."""

    n: int
    m: int

    @classmethod
    def make(cls, n=0, m=0):
        return cls(int(n), int(m) % L)

    @classmethod
    def q(cls, e=1):
        e2 = Fraction(e) * 2
        if e2.denominator != 1:
            raise ValueError("q-exponent must be a half-integer")
        return cls(int(e2), 0)

    @classmethod
    def root_of_unity(cls, M, k=1):
        return cls(0, (k * (L // M)) % L)

    def __mul__(self, other):
        return SpectralParam(self.n + other.n, (self.m + other.m) % L)

    def __truediv__(self, other):
        return SpectralParam(self.n - other.n, (self.m - other.m) % L)

    def __pow__(self, k):
        return SpectralParam(self.n * k, (self.m * k) % L)

    def __neg__(self):
        return SpectralParam(self.n, (self.m + L // 2) % L)

    def inverse(self):
        return SpectralParam(-self.n, (-self.m) % L)

    def render(self):
        m = self.m % L
        sign = "-" if m == 3 else ""
        parts = [] if m in (0, 3) else [f"w^{m}"]
        if self.n:
            e = Fraction(self.n, 2)
            parts.append("q" if e == 1 else f"q^{e}" if e.denominator == 1 else f"q^{{{e}}}")
        return sign + ("*".join(parts) or "1")

    def __str__(self):
        return self.render()

    def value(self):
        """The parameter as an element of the coefficient field."""
        sp = CycloRational.s_power(self.n)
        m = self.m % L
        if m == 0:
            return sp
        if m == 3:
            return -sp
        zeta6 = CycloRational.const(1) + CycloRational.zeta(3)
        return sp * zeta6**m


ONE = SpectralParam(0, 0)
MINUS = SpectralParam(0, 3)

_FACTOR = re.compile(r"^(-?)(?:(q|w)(?:\^\{?(-?\d+)(?:/(\d+))?\}?)?|(1))$")


def parse_param(text):
    """Parse a spectral parameter such as "q^{3/2}*w^{2}", "-q^2", "1".

    ``w`` denotes a primitive sixth root of unity.
    """
    text = text.replace(" ", "")
    if not text:
        raise ValueError("empty spectral parameter")
    out = ONE
    for pos, factor in _tokens(text):
        mt = _FACTOR.match(factor)
        if not mt:
            raise ValueError(f"cannot parse spectral factor {factor!r} at column {pos + 1}")
        sign, sym, num, den, one = mt.groups()
        if sym:
            e = Fraction(int(num) if num is not None else 1, int(den) if den else 1)
            if sym == "q":
                out = out * SpectralParam.q(e)
            else:
                if e.denominator != 1:
                    raise ValueError(f"fractional root-of-unity exponent at column {pos + 1}")
                out = out * SpectralParam(0, int(e) % L)
        if sign:
            out = -out
    return out


def _tokens(text):
    pos = 0
    for part in text.split("*"):
        yield pos, part
        pos += len(part) + 1


def _omega(fd, k=1):
    return SpectralParam(0, (fd.omega_m * k) % L)


def _merge(dst, roots, sign=1):
    for b, mlt in roots:
        v = dst.get(b, 0) + sign * mlt
        if v:
            dst[b] = v
        else:
            dst.pop(b, None)


class LWeight:
    """A factored l-weight over the orbit representatives of a datum."""

    __slots__ = ("datum", "const", "roots", "_hash")

    def __init__(self, datum, const, roots):
        self.datum = datum
        self.const = tuple(Fraction(c) for c in const)
        self.roots = tuple(tuple(sorted((b, m) for b, m in r.items() if m)) if isinstance(r, dict) else r for r in roots)
        self._hash = None

    @classmethod
    def identity(cls, fd):
        return cls(fd, [0] * len(fd.reps), [()] * len(fd.reps))

    @classmethod
    def constant(cls, fd, const):
        return cls(fd, const, [()] * len(fd.reps))

    def __mul__(self, other):
        if not isinstance(other, LWeight):
            return NotImplemented
        if other.datum != self.datum:
            raise ValueError("l-weights over different data")
        roots = []
        for r1, r2 in zip(self.roots, other.roots):
            if not r2:
                roots.append(r1)
            elif not r1:
                roots.append(r2)
            else:
                d = dict(r1)
                _merge(d, r2)
                roots.append(tuple(sorted(d.items())))
        return LWeight(self.datum, [a + b for a, b in zip(self.const, other.const)], roots)

    def inverse(self):
        return LWeight(self.datum, [-c for c in self.const], [tuple((b, -m) for b, m in r) for r in self.roots])

    def __truediv__(self, other):
        return self * other.inverse()

    def __pow__(self, k):
        if k == 0:
            return LWeight.identity(self.datum)
        return LWeight(self.datum, [k * c for c in self.const], [tuple((b, k * m) for b, m in r) for r in self.roots])

    def __eq__(self, other):
        return (
            isinstance(other, LWeight)
            and self.datum == other.datum
            and self.const == other.const
            and self.roots == other.roots
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.const, self.roots))
        return self._hash

    def sort_key(self):
        return (self.const, self.roots)

    def is_constant(self):
        return all(not r for r in self.roots)

    def varpi(self):
        """q-exponents of Psi_i(0) at the representatives."""
        return self.const

    def shifted(self, c):
        """Image under the spectral shift u -> c u."""
        return LWeight(self.datum, self.const, [tuple(sorted((b * c, m) for b, m in r)) for r in self.roots])

    def satisfies_twist(self):
        fd = self.datum
        w = _omega(fd)
        for i, r in zip(fd.reps, self.roots):
            if fd.M > 1 and fd.is_fixed(i):
                d = dict(r)
                if any(d.get(b * w, 0) != m for b, m in r):
                    return False
        return True

    def polynomial_parts(self, i):
        """(numerator roots, denominator roots) at representative i."""
        r = self.roots[self.datum.reps.index(i)]
        return [(b, m) for b, m in r if m > 0], [(b, -m) for b, m in r if m < 0]

    def series(self, i, order):
        """Power-series coefficients of Psi_i(u) up to u**order."""
        idx = self.datum.reps.index(i)
        coeffs = [CycloRational.q_power(self.const[idx])] + [CycloRational.const(0)] * order
        for b, m in self.roots[idx]:
            v = b.value()
            for _ in range(abs(m)):
                if m > 0:
                    for k in range(order, 0, -1):
                        coeffs[k] = coeffs[k] - v * coeffs[k - 1]
                else:
                    for k in range(1, order + 1):
                        coeffs[k] = coeffs[k] + v * coeffs[k - 1]
        return coeffs

    def to_json(self):
        fd = self.datum
        return {
            "prefactor": [str(c) for c in self.const],
            "orbits": {str(i): [[b.n, b.m, m] for b, m in r] for i, r in zip(fd.reps, self.roots)},
        }

    def render(self):
        parts = []
        fd = self.datum
        for i, c, r in zip(fd.reps, self.const, self.roots):
            fac = "".join(f"(1{_signed(b)}u)^{m}" for b, m in r)
            parts.append(f"{i}: q^{c}{fac}")
        return "[" + "; ".join(parts) + "]"

    def __repr__(self):
        return f"LWeight({self.render()})"


def _signed(b):
    """Render -b as a signed term: _signed(q) == '-q', _signed(-q) == '+q'."""
    r = b.render()
    return "+" + r[1:] if r.startswith("-") else "-" + r


def _rep(fd, i, a):
    """Move (i, a) to the representative: Z_{sigma^k(i),a} = Z_{i, a omega^k}."""
    rep, k = fd.rep_of[i]
    return rep, a * _omega(fd, k)


def _orbit_roots(fd, i, b, mult):
    if fd.M > 1 and fd.is_fixed(i):
        return [(b * _omega(fd, r), mult) for r in range(fd.M)]
    return [(b, mult)]


def _build(fd, pieces, const=None):
    """pieces: list of (representative, root, mult)."""
    acc = {i: {} for i in fd.reps}
    for i, b, m in pieces:
        _merge(acc[i], _orbit_roots(fd, i, b, m))
    const = const or {}
    return LWeight(fd, [const.get(i, 0) for i in fd.reps], [acc[i] for i in fd.reps])


def as_param(a):
    if isinstance(a, SpectralParam):
        return a
    if isinstance(a, str):
        return parse_param(a)
    if a == 1:
        return ONE
    if a == -1:
        return MINUS
    raise TypeError(f"not a spectral parameter: {a!r}")


def make_Z(fd, i, a):
    """Z_{i,a} (Y_{i,a} when the datum is untwisted)."""
    i, a = _rep(fd, i, as_param(a))
    q = SpectralParam.q(1)
    return _build(fd, [(i, a / q, 1), (i, a * q, -1)], {i: fd.N(i)})


make_Y = make_Z


def make_A(fd, i, a):
    a = as_param(a)
    q = SpectralParam.q(1)
    w = make_Z(fd, i, a * q) * make_Z(fd, i, a / q)
    for j in fd.neighbors(i):
        w = w / make_Z(fd, j, a)
    return w


def make_psi(fd, i, a, sign=1):
    """Prefundamental l-weight Psi^{+}_{i,a} (sign=+1) or Psi^{-}_{i,a} (sign=-1)."""
    i, a = _rep(fd, i, as_param(a))
    return _build(fd, [(i, a, 1 if sign > 0 else -1)])


def make_psi_tilde(fd, i, a):
    """Psi_{i,a}^{-1} prod_{j ~ i} Psi_{j,aq}, folded for twisted data."""
    a = as_param(a)
    if fd.M > 1:
        base = fd.unfolded()
        return fold_weight(make_psi_tilde(base, i, a), fd)
    q = SpectralParam.q(1)
    w = make_psi(fd, i, a, -1)
    for j in fd.neighbors(i):
        w = w * make_psi(fd, j, a * q, 1)
    return w


def t_weight(fd, vec):
    """Constant l-weight [lambda] with lambda(k_i) = q**vec_i."""
    return LWeight.constant(fd, vec)


def alpha_weight(fd, i, scale=1):
    """[scale * alpha_i] as a constant l-weight."""
    col = fd.reps.index(i)
    return LWeight.constant(fd, [Fraction(row[col]) * Fraction(scale) for row in fd.B])


def fund_weight(fd, i):
    """[omega_i]: q**N_i at i and 1 elsewhere."""
    return LWeight.constant(fd, [fd.N(j) if j == i else 0 for j in fd.reps])


def fold_weight(w, target):
    """The folding map pi_0 from the unfolded datum to ``target``."""
    base = w.datum
    if base.M != 1 or base.finite_type != target.finite_type:
        raise ValueError("fold_weight expects an l-weight of the unfolded diagram")
    if target.M == 1:
        return w
    acc = {i: {} for i in target.reps}
    const = {i: Fraction(0) for i in target.reps}
    for j, c, r in zip(base.reps, w.const, w.roots):
        i, k = target.rep_of[j]
        if target.is_fixed(i):
            const[i] += c * target.M
            for b, m in r:
                _merge(acc[i], [(b * _omega(target, t), m) for t in range(target.M)])
        else:
            const[i] += c
            _merge(acc[i], [(b * _omega(target, k), m) for b, m in r])
    return LWeight(target, [const[i] for i in target.reps], [acc[i] for i in target.reps])


def varpi(w):
    return w.varpi()


def height_vector(fd, top, low):
    """alpha-coordinates of top - low, or None if not in the positive cone."""
    diff = [Fraction(a) - Fraction(b) for a, b in zip(top, low)]
    out = []
    for row in fd.B_inv:
        v = sum(x * y for x, y in zip(row, diff))
        if v.denominator != 1 or v < 0:
            return None
        out.append(int(v))
    return tuple(out)


def height_between(w1, w2):
    """alpha-coordinates of varpi(w1) - varpi(w2) when comparable, else None."""
    return height_vector(w1.datum, w1.const, w2.const)


class QCharacter:
    """A truncated formal sum of l-weights with integer multiplicities.

    ``top`` is the t-weight of the leading term and ``trunc`` the largest
    alpha-height below it that is kept (``None`` means no truncation).
    """

    __slots__ = ("datum", "terms", "top", "trunc")

    def __init__(self, datum, terms, top, trunc=None):
        self.datum = datum
        self.top = tuple(Fraction(x) for x in top)
        self.trunc = trunc
        clean = {}
        for w, m in terms.items():
            if m == 0:
                continue
            h = self.height(w)
            if h is None:
                raise ValueError(f"term {w!r} is not below the leading weight")
            if trunc is None or h <= trunc:
                clean[w] = m
        self.terms = clean

    @classmethod
    def single(cls, w, trunc=None, mult=1):
        return cls(w.datum, {w: mult}, w.const, trunc)

    @classmethod
    def one(cls, fd, trunc=None):
        return cls.single(LWeight.identity(fd), trunc)

    def height(self, w):
        hv = height_vector(self.datum, self.top, w.const)
        return None if hv is None else sum(hv)

    def _rebase(self, other):
        """Common leading weight and truncation for sums."""
        hv = height_vector(self.datum, self.top, other.top)
        if hv is not None:
            top, gap_other, gap_self = self.top, sum(hv), 0
        else:
            hv = height_vector(self.datum, other.top, self.top)
            if hv is None:
                raise ValueError("leading weights are not comparable")
            top, gap_other, gap_self = other.top, 0, sum(hv)
        cands = []
        if self.trunc is not None:
            cands.append(self.trunc + gap_self)
        if other.trunc is not None:
            cands.append(other.trunc + gap_other)
        return top, (min(cands) if cands else None)

    def __add__(self, other):
        if isinstance(other, LWeight):
            other = QCharacter.single(other, self.trunc)
        top, trunc = self._rebase(other)
        terms = defaultdict(int, self.terms)
        for w, m in other.terms.items():
            terms[w] += m
        return QCharacter(self.datum, terms, top, trunc)

    def __neg__(self):
        return QCharacter(self.datum, {w: -m for w, m in self.terms.items()}, self.top, self.trunc)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return QCharacter(self.datum, {w: m * other for w, m in self.terms.items()}, self.top, self.trunc)
        if isinstance(other, LWeight):
            return QCharacter(
                self.datum,
                {w * other: m for w, m in self.terms.items()},
                [a + b for a, b in zip(self.top, other.const)],
                self.trunc,
            )
        if not isinstance(other, QCharacter):
            return NotImplemented
        tops = [a + b for a, b in zip(self.top, other.top)]
        cands = [t for t in (self.trunc, other.trunc) if t is not None]
        trunc = min(cands) if cands else None
        fd = self.datum
        # bucket by height so that out-of-window products are skipped
        def buckets(ch):
            out = defaultdict(list)
            for w, m in ch.terms.items():
                out[ch.height(w)].append((w, m))
            return out

        b1, b2 = buckets(self), buckets(other)
        terms = defaultdict(int)
        for h1, l1 in b1.items():
            for h2, l2 in b2.items():
                if trunc is not None and h1 + h2 > trunc:
                    continue
                for w1, m1 in l1:
                    for w2, m2 in l2:
                        terms[w1 * w2] += m1 * m2
        return QCharacter(fd, terms, tops, trunc)

    __rmul__ = __mul__

    def window(self, h):
        if self.trunc is not None and h > self.trunc:
            raise ValueError(f"window {h} exceeds truncation {self.trunc}")
        return QCharacter(self.datum, self.terms, self.top, h)

    def __eq__(self, other):
        return (
            isinstance(other, QCharacter)
            and self.datum == other.datum
            and self.top == other.top
            and self.trunc == other.trunc
            and self.terms == other.terms
        )

    def leading(self):
        return [(w, m) for w, m in self.terms.items() if self.height(w) == 0]

    def usual(self):
        """Image under varpi: the ordinary character as constant l-weights."""
        terms = defaultdict(int)
        for w, m in self.terms.items():
            terms[LWeight.constant(self.datum, w.const)] += m
        return QCharacter(self.datum, terms, self.top, self.trunc)

    def inverse(self):
        lead = self.leading()
        if len(lead) != 1 or abs(lead[0][1]) != 1:
            raise ValueError("inverse needs a single leading term of multiplicity +-1")
        if self.trunc is None:
            raise ValueError("inverse of an untruncated character")
        w0, m0 = lead[0]
        inv0 = w0.inverse()
        rest = QCharacter(self.datum, {w * inv0: -m * m0 for w, m in self.terms.items() if w != w0}, [0] * len(self.top), self.trunc)
        acc = QCharacter.one(self.datum, self.trunc)
        power = QCharacter.one(self.datum, self.trunc)
        for _ in range(self.trunc):
            power = power * rest
            if not power.terms:
                break
            acc = acc + power
        return acc * inv0 * m0

    def normalized(self):
        """Divide by the ordinary character."""
        return self * self.usual().inverse()

    def total(self):
        return sum(self.terms.values())

    def by_height(self):
        out = defaultdict(dict)
        for w, m in self.terms.items():
            out[self.height(w)][w] = m
        return dict(out)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (self.height(t[0]), t[0].sort_key()))

    def to_json(self):
        out = []
        for w, m in self.sorted_terms():
            d = {"lweight": w.render(), **w.to_json()}
            d["height"] = self.height(w)
            d["multiplicity"] = m
            out.append(d)
        return out

    def __repr__(self):
        return f"QCharacter({self.datum.name}, {len(self.terms)} terms, trunc={self.trunc})"


def fold_char(ch, target):
    terms = defaultdict(int)
    for w, m in ch.terms.items():
        terms[fold_weight(w, target)] += m
    top = fold_weight(LWeight.constant(ch.datum, ch.top), target).const
    return QCharacter(target, terms, top, ch.trunc)


def resolve(fd):
    return fd if isinstance(fd, FoldingDatum) else build_type(fd)
