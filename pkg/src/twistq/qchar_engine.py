"""Truncated q-characters.

Non-twisted simply-laced characters come from the Frenkel-Mukhin expansion
on Y-monomials.  Twisted characters of KR modules are obtained by folding,
prefundamental characters as stabilized limits of normalized KR characters.
"""
from __future__ import annotations

import re
from collections import defaultdict

from .lweights import (
    LWeight,
    QCharacter,
    SpectralParam,
    alpha_weight,
    fold_char,
    make_A,
    make_psi,
    make_psi_tilde,
    make_Y,
    make_Z,
    parse_param,
    resolve,
)

DEFAULT_BUDGET = 10**6
Q1 = SpectralParam.q(1)
Q2 = SpectralParam.q(2)


class TermBudgetExceeded(RuntimeError):
    pass


class ExpansionFailure(RuntimeError):
    """The sl2-consistency completion reached an inconsistent state."""


class DominantMonomial:
    """A product of Y (or Z) variables with positive exponents."""

    def __init__(self, factors):
        acc = defaultdict(int)
        for node, a, *e in factors:
            acc[(node, a)] += e[0] if e else 1
        if any(v <= 0 for v in acc.values()):
            raise ValueError("dominant monomials need positive exponents")
        self.factors = tuple(sorted(acc.items()))

    def __iter__(self):
        for (node, a), e in self.factors:
            yield node, a, e

    def __eq__(self, other):
        return isinstance(other, DominantMonomial) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def lweight(self, fd):
        w = LWeight.identity(fd)
        for node, a, e in self:
            w = w * make_Z(fd, node, a) ** e
        return w

    def render(self, var="Z"):
        parts = []
        for node, a, e in self:
            s = f"{var}[{node},{a.render()}]"
            parts.append(s if e == 1 else f"{s}^{e}")
        return "*".join(parts)

    def __repr__(self):
        return f"DominantMonomial({self.render()})"


_MONO = re.compile(r"^\s*([YZ])\[\s*(\d+)\s*,\s*([^\]]+)\](?:\^(\d+))?\s*$")


def parse_monomial(text):
    """Parse "Z[1,q^-1]*Z[1,q^1]" into a DominantMonomial."""
    factors = []
    depth = 0
    start = 0
    chunks = []
    for k, ch in enumerate(text):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        elif ch == "*" and depth == 0:
            chunks.append((start, text[start:k]))
            start = k + 1
    chunks.append((start, text[start:]))
    for pos, chunk in chunks:
        mt = _MONO.match(chunk)
        if not mt:
            raise ValueError(f"cannot parse monomial factor {chunk.strip()!r} at column {pos + 1}")
        _, node, param, exp = mt.groups()
        factors.append((int(node), parse_param(param), int(exp) if exp else 1))
    return DominantMonomial(factors)


# --- Y-monomials for the expansion ------------------------------------------

def _ymul(m, other):
    d = dict(m)
    for key, e in other:
        v = d.get(key, 0) + e
        if v:
            d[key] = v
        else:
            d.pop(key)
    return tuple(sorted(d.items()))


class _ACache:
    def __init__(self, fd):
        self.fd = fd
        self.cache = {}

    def inv(self, i, c):
        key = (i, c)
        if key not in self.cache:
            d = defaultdict(int)
            d[(i, c * Q1)] -= 1
            d[(i, c / Q1)] -= 1
            for j in self.fd.neighbors(i):
                d[(j, c)] += 1
            self.cache[key] = tuple(sorted((k, v) for k, v in d.items() if v))
        return self.cache[key]


def _strings(points):
    """Split a multiset of spectral points into maximal q^2-strings.

    Returns (start, length) pairs; strings are built greedily from the lowest
    point of each q^2-line so they are pairwise in general position.
    """
    lines = defaultdict(lambda: defaultdict(int))
    for b, e in points.items():
        lines[(b.n % 4, b.m)][b.n] += e
    out = []
    for (_, m), pts in lines.items():
        pts = dict(pts)
        while pts:
            n0 = min(pts)
            n = n0
            while pts.get(n, 0) > 0:
                pts[n] -= 1
                if not pts[n]:
                    del pts[n]
                n += 4
            out.append((SpectralParam(n0, m), (n - n0) // 4))
    return out


def _sl2_terms(acache, i, strings):
    """Non-leading terms of the sl2 character as (A^{-1} product, count, coefficient)."""
    factors = []
    for b, k in strings:
        terms = [((), 0)]
        acc = ()
        for t in range(1, k + 1):
            acc = _ymul(acc, acache.inv(i, b * SpectralParam(4 * k - 2 - 4 * (t - 1), 0)))
            terms.append((acc, t))
        factors.append(terms)
    combined = {(): (0, 1)}
    for terms in factors:
        nxt = defaultdict(lambda: [0, 0])
        for m1, (h1, c1) in combined.items():
            for m2, h2 in terms:
                key = _ymul(m1, m2)
                nxt[key][0] = h1 + h2
                nxt[key][1] += c1
        combined = {k: (v[0], v[1]) for k, v in nxt.items()}
    return [(m, h, c) for m, (h, c) in combined.items() if m]


def fm_expand(fd, top, trunc, budget=DEFAULT_BUDGET):
    """Frenkel-Mukhin expansion of a dominant Y-monomial, up to height trunc.

    Returns {monomial: (multiplicity, height)} with monomials as sorted tuples
    of ((node, param), exponent).
    """
    if fd.M != 1:
        raise ValueError("the expansion runs on untwisted simply-laced data")
    acache = _ACache(fd)
    top = tuple(sorted(((node, a), e) for node, a, e in top))
    mult = {top: 1}
    height = {top: 0}
    colored = defaultdict(lambda: defaultdict(int))
    levels = defaultdict(list)
    levels[0].append(top)
    for h in range(trunc + 1):
        for m in sorted(levels.get(h, ()), key=repr):
            mu = max([mult[m]] + [colored[m][i] for i in fd.nodes])
            mult[m] = mu
            for i in fd.nodes:
                pts = {a: e for (node, a), e in m if node == i}
                if any(e < 0 for e in pts.values()):
                    if colored[m][i] != mu:
                        raise ExpansionFailure(f"monomial {m} is not {i}-consistent")
                    continue
                k = mu - colored[m][i]
                if k < 0:
                    raise ExpansionFailure(f"negative {i}-coupling at {m}")
                if k == 0:
                    continue
                colored[m][i] += k
                for amono, dh, c in _sl2_terms(acache, i, _strings(pts)):
                    hh = h + dh
                    if hh > trunc:
                        continue
                    m2 = _ymul(m, amono)
                    if m2 not in height:
                        height[m2] = hh
                        mult[m2] = 0
                        levels[hh].append(m2)
                        if len(height) > budget:
                            raise TermBudgetExceeded(f"expansion exceeded {budget} monomials")
                    colored[m2][i] += k * c
    for m in height:
        mult[m] = max([mult[m]] + [colored[m][i] for i in fd.nodes])
    return {m: (mult[m], height[m]) for m in height}


def _ymono_lweight(fd, m, cache):
    w = LWeight.identity(fd)
    for (node, a), e in m:
        key = (node, a)
        if key not in cache:
            cache[key] = make_Y(fd, node, a)
        w = w * (cache[key] if e == 1 else cache[key] ** e)
    return w


def fm_qcharacter(fd, m, trunc, budget=DEFAULT_BUDGET):
    """Truncated q-character of L(m) for an untwisted simply-laced datum."""
    fd = resolve(fd)
    if isinstance(m, str):
        m = parse_monomial(m)
    raw = fm_expand(fd, m, trunc, budget)
    cache = {}
    terms = {}
    for mono, (mu, _) in raw.items():
        if mu:
            terms[_ymono_lweight(fd, mono, cache)] = mu
    return QCharacter(fd, terms, m.lweight(fd).const, trunc)


def kr_monomial(i, k, a):
    a = a if isinstance(a, SpectralParam) else parse_param(str(a))
    return DominantMonomial([(i, a * Q2**t, 1) for t in range(k)])


def kr_qcharacter(fd, i, k, a, trunc, budget=DEFAULT_BUDGET):
    """q-character of the KR module W^{(i)}_{k,a}; twisted data go through folding."""
    fd = resolve(fd)
    if k < 1:
        raise ValueError("KR modules need k >= 1")
    if isinstance(a, str):
        a = parse_param(a)
    base = fd.unfolded() if fd.M > 1 else fd
    ch = fm_qcharacter(base, kr_monomial(i, k, a), trunc, budget)
    return fold_char(ch, fd) if fd.M > 1 else ch


def _limit_window(fd, i, a, trunc, budget):
    """Stabilized window of chi_q(W_{k, a q^{-2k+1}}) / M_k and the k where it settled."""
    prev = None
    for k in range(1, trunc + 4):
        start = a * SpectralParam(2 - 4 * k, 0)
        ch = kr_qcharacter(fd, i, k, start, trunc, budget)
        top = kr_monomial(i, k, start).lweight(fd)
        norm = ch * top.inverse()
        if prev is not None and norm == prev:
            return norm, k - 1
        prev = norm
    raise ExpansionFailure(f"normalized KR characters did not stabilize by k = {trunc + 3}")


def neg_prefund_qchar(fd, i, a, trunc, budget=DEFAULT_BUDGET, report=False):
    """Truncated character of L^-_{i,a}; with report=True also the stabilization k."""
    fd = resolve(fd)
    a = a if isinstance(a, SpectralParam) else parse_param(str(a))
    lim, k = _limit_window(fd, i, a, trunc, budget)
    ch = lim * make_psi(fd, i, a, -1)
    return (ch, k) if report else ch


def pos_prefund_qchar(fd, i, a, trunc, budget=DEFAULT_BUDGET):
    """[Psi^+_{i,a}] times the ordinary character of the prefundamental module."""
    fd = resolve(fd)
    a = a if isinstance(a, SpectralParam) else parse_param(str(a))
    lim, _ = _limit_window(fd, i, a, trunc, budget)
    return lim.usual() * make_psi(fd, i, a, 1)


def chi_string(fd, i, a, trunc):
    """sum_r (A_{i,a} A_{i,aq^-2} ... A_{i,aq^{-2r+2}})^{-1} up to height trunc."""
    terms = {}
    acc = LWeight.identity(fd)
    terms[acc] = 1
    for r in range(trunc):
        acc = acc / make_A(fd, i, a / Q2**r)
        terms[acc] = terms.get(acc, 0) + 1
    return QCharacter(fd, terms, [0] * len(fd.reps), trunc)


def normalized_X_qchar(fd, i, a, trunc):
    """chi_q(X_{i,a}) / chi(X_{i,a}) = [Psi~_{i,a}] chi_{i,a} (1 - [-alpha_i])."""
    fd = resolve(fd)
    a = a if isinstance(a, SpectralParam) else parse_param(str(a))
    one = LWeight.identity(fd)
    factor = QCharacter(fd, {one: 1, alpha_weight(fd, i, -1): -1}, [0] * len(fd.reps), trunc)
    return chi_string(fd, i, a, trunc) * factor * make_psi_tilde(fd, i, a)


def cone_decomposition(ch, lead=None):
    """Express every term as lead * prod A^{-1}; returns {term: A-factors} or raises."""
    fd = ch.datum
    if lead is None:
        heads = ch.leading()
        if len(heads) != 1:
            raise ValueError("no unique leading term")
        lead = heads[0][0]
    out = {}
    for w in ch.terms:
        ratio = w / lead
        out[w] = a_factorization(fd, ratio)
        if out[w] is None:
            raise ValueError(f"term {w!r} is not in the A^{-1} cone of the leading term")
    return out


def a_factorization(fd, ratio, depth=None):
    """Write an l-weight as a product of A^{-1}_{j,c}; returns the list or None.

    Peels the root with the largest q-exponent: in a product of A^{-1}_{j,c}
    the numerator root c q^{+1} at j with maximal exponent cannot cancel.
    """
    found = []
    cur = ratio
    budget = depth if depth is not None else 10_000
    while not (cur.is_constant() and all(c == 0 for c in cur.const)):
        if budget == 0:
            return None
        budget -= 1
        best = None
        for j, roots in zip(fd.reps, cur.roots):
            for b, m in roots:
                if m > 0 and (best is None or b.n > best[1].n):
                    best = (j, b)
        if best is None:
            return None
        j, b = best
        c = b / Q2
        found.append((j, c))
        cur = cur * make_A(fd, j, c)
    return found
