"""QQ~-systems, TQ relations, the A_2^(2) counterexamples and Bethe equations.

Every identity is checked in the image of the q-character map, where
Q_{i,a} -> [Psi^+_{i,a}] and Q~_{i,a} -> [-alpha_i/2][Psi~_{i,aq^-2}] chi_{i,aq^-2}.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from .lweights import (
    LWeight,
    QCharacter,
    SpectralParam,
    alpha_weight,
    fold_char,
    fund_weight,
    make_psi,
    make_psi_tilde,
    parse_param,
    resolve,
)
from .qchar_engine import chi_string, fm_expand, fm_qcharacter, kr_monomial, kr_qcharacter
from .root_data import twisted_cartan

Q1 = SpectralParam.q(1)
Q2 = SpectralParam.q(2)


def _param(a):
    return a if isinstance(a, SpectralParam) else parse_param(str(a))


def eval_Q(fd, i, a, trunc=0):
    return QCharacter.single(make_psi(resolve(fd), i, _param(a), 1), trunc)


def eval_Qtilde(fd, i, a, trunc=0):
    fd = resolve(fd)
    b = _param(a) / Q2
    return chi_string(fd, i, b, trunc) * (alpha_weight(fd, i, Fraction(-1, 2)) * make_psi_tilde(fd, i, b))


def qq_rhs_factors(fd, i):
    """Q-factors (j, c) of the right-hand side, meaning prod Q_{j, a c}."""
    fd = resolve(fd)
    one = SpectralParam(0, 0)
    if fd.M == 1:
        return [(j, one) for j in fd.neighbors(i)]
    if fd.is_a2n():
        n = len(fd.reps)
        out = []
        if i == fd.reps[-1]:
            out.append((i, SpectralParam(0, 3)))
            if n > 1:
                out.append((fd.reps[-2], one))
            return out
        k = fd.reps.index(i)
        for nb in (k - 1, k + 1):
            if 0 <= nb < n:
                out.append((fd.reps[nb], one))
        return out
    tc = twisted_cartan(fd)
    out = []
    for j in fd.reps:
        if j == i:
            continue
        c = tc.C(j, i)
        if c == -1:
            out.append((j, one))
        elif c == -2:
            out += [(j, one), (j, SpectralParam(0, 3))]
        elif c == -3:
            out += [(j, one), (j, SpectralParam(0, 2)), (j, SpectralParam(0, 4))]
        elif c != 0:
            raise ValueError(f"unexpected Cartan entry {c}")
    return out


def qq_sides(fd, i, a, trunc):
    """(LHS, RHS) of the QQ~-relation at (i, a) as truncated characters."""
    fd = resolve(fd)
    a = _param(a)
    half = alpha_weight(fd, i, Fraction(1, 2))
    t1 = eval_Qtilde(fd, i, a * Q1, trunc) * (half * make_psi(fd, i, a / Q1, 1))
    t2 = eval_Qtilde(fd, i, a / Q1, trunc) * (half.inverse() * make_psi(fd, i, a * Q1, 1))
    lhs = (t1 - t2).window(trunc)
    rhs = LWeight.identity(fd)
    for j, c in qq_rhs_factors(fd, i):
        rhs = rhs * make_psi(fd, j, a * c, 1)
    return lhs, QCharacter.single(rhs, trunc)


def _first_difference(x, y):
    for w in sorted(set(x.terms) | set(y.terms), key=lambda w: (x.height(w) if x.height(w) is not None else 99, w.sort_key())):
        if x.terms.get(w, 0) != y.terms.get(w, 0):
            return f"{w.render()}: {x.terms.get(w, 0)} vs {y.terms.get(w, 0)}"
    if x.top != y.top:
        return f"leading weights differ: {x.top} vs {y.top}"
    return None


def verify_qq(fd, i, a, trunc):
    fd = resolve(fd)
    lhs, rhs = qq_sides(fd, i, a, trunc)
    diff = _first_difference(lhs, rhs)
    out = {
        "relation": f"QQ~ {fd.name} node {i} a={_param(a).render()}",
        "trunc": trunc,
        "terms": len(lhs.terms),
        "status": "pass" if diff is None else "fail",
    }
    if diff:
        out["first_difference"] = diff
    return out


# --- TQ relations ---------------------------------------------------------------

@dataclass(frozen=True)
class TQTerm:
    """coefficient * [weight] * prod [L+_{num}] / prod [L+_{den}]."""

    coeff: int
    weight: tuple
    num: tuple
    den: tuple

    def canonical(self):
        n, d = Counter(self.num), Counter(self.den)
        common = n & d
        n, d = n - common, d - common
        return TQTerm(self.coeff, self.weight, tuple(sorted(n.elements())), tuple(sorted(d.elements())))

    def lweight(self, fd):
        w = LWeight.identity(fd)
        for j, e in zip(fd.reps, self.weight):
            w = w * fund_weight(fd, j) ** e
        for j, b in self.num:
            w = w * make_psi(fd, j, b, 1)
        for j, b in self.den:
            w = w / make_psi(fd, j, b, 1)
        return w


def _render_factor(j, b):
    return f"[L+_{{{j},{b.render()}}}]"


def render_weight(fd, weight):
    parts = []
    for j, e in zip(fd.reps, weight):
        if e:
            parts.append(f"[{'' if e > 0 else '-'}{'' if abs(e) == 1 else abs(e)}omega_{j}]")
    return "*".join(parts)


@dataclass
class RingIdentity:
    datum: object
    lhs: str
    terms: list
    node: int
    param: SpectralParam

    def canonical(self):
        merged = Counter()
        for t in self.terms:
            c = t.canonical()
            merged[(c.weight, c.num, c.den)] += c.coeff
        terms = [TQTerm(m, *k) for k, m in merged.items() if m]
        return RingIdentity(self.datum, self.lhs, sorted(terms, key=lambda t: (t.weight, t.num, t.den)), self.node, self.param)

    def cleared(self):
        """Multiply through by the common denominator: (lhs factors, terms)."""
        can = self.canonical()
        common = Counter()
        for t in can.terms:
            common |= Counter(t.den)
        out = []
        for t in can.terms:
            extra = common - Counter(t.den)
            out.append(TQTerm(t.coeff, t.weight, tuple(sorted(t.num + tuple(extra.elements()))), ()))
        return tuple(sorted(common.elements())), out

    def render_cleared(self):
        fd = self.datum
        lhs_factors, terms = self.cleared()
        pieces = []
        for t in terms:
            body = "*".join(x for x in [render_weight(fd, t.weight)] + [_render_factor(*f) for f in t.num] if x) or "1"
            pieces.append(body if t.coeff == 1 else f"{t.coeff}*{body}")
        return self.lhs + "".join("*" + _render_factor(*f) for f in lhs_factors) + " = " + " + ".join(pieces)

    def render(self):
        fd = self.datum
        pieces = []
        for t in self.canonical().terms:
            body = "*".join(x for x in [render_weight(fd, t.weight)] + [_render_factor(*f) for f in t.num] if x) or "1"
            if t.den:
                body += "/(" + "*".join(_render_factor(*f) for f in t.den) + ")"
            pieces.append(body if t.coeff == 1 else f"{t.coeff}*{body}")
        return f"{self.lhs} = " + " + ".join(pieces)

    def evaluate(self, trunc):
        fd = self.datum
        lhs = kr_qcharacter(fd, self.node, 1, self.param, trunc)
        terms = {}
        for t in self.terms:
            w = t.lweight(fd)
            terms[w] = terms.get(w, 0) + t.coeff
        rhs = QCharacter(fd, terms, lhs.top, trunc)
        return lhs, rhs


def _omega_of(fd, k):
    return SpectralParam(0, (fd.omega_m * k) % 6)


def tq_relation(fd, i, a, trunc=None):
    """TQ relation obtained from the fundamental q-character by Z -> [omega] Q/Q."""
    fd = resolve(fd)
    a = _param(a)
    base = fd.unfolded() if fd.M > 1 else fd
    raw = fm_expand(base, kr_monomial(i, 1, a), trunc if trunc is not None else 64)
    terms = []
    for mono, (mult, _) in raw.items():
        if not mult:
            continue
        weight = Counter()
        num, den = [], []
        for (node, b), e in mono:
            rep, k = fd.rep_of[node]
            b = b * _omega_of(fd, k)
            weight[rep] += e
            lo, hi = (rep, b / Q1), (rep, b * Q1)
            if e > 0:
                num += [lo] * e
                den += [hi] * e
            else:
                num += [hi] * (-e)
                den += [lo] * (-e)
        terms.append(TQTerm(mult, tuple(weight[j] for j in fd.reps), tuple(sorted(num)), tuple(sorted(den))))
    return RingIdentity(fd, f"[V_{{{i},{a.render()}}}]", terms, i, a).canonical()


# --- counterexamples -------------------------------------------------------------

def verify_counterexamples(bound=8):
    from .repcheck import load_builtin, qchar_from_module

    report = []
    tw = resolve("A2^2")
    sl3 = resolve("A2")
    six = kr_qcharacter(tw, 1, 2, "1", 64).total()
    nine = fm_qcharacter(sl3, "Y[1,1]*Y[2,-q^2]", 64).total()
    report.append({"check": "dimensions 6 vs 9", "twisted": six, "untwisted": nine, "status": "pass" if (six, nine) == (6, 9) else "fail"})
    x_tw = qchar_from_module(load_builtin("X_A2t", bound))
    x_sl3 = qchar_from_module(load_builtin("Xtilde_sl3", bound))
    folded = fold_char(x_sl3, tw)
    h = min(folded.trunc, x_tw.trunc)
    a_win, b_win = folded.window(h), x_tw.window(h)
    diff = _first_difference(a_win, b_win)
    report.append({"check": "fold of sl3 character differs from twisted character", "trunc": h, "first_difference": diff, "status": "pass" if diff else "fail"})
    na, nb = a_win.normalized(), b_win.normalized()
    diff2 = _first_difference(na, nb)
    report.append({"check": "normalized characters agree", "trunc": h, "status": "pass" if diff2 is None else "fail", **({"first_difference": diff2} if diff2 else {})})
    return report


# --- Bethe equations -------------------------------------------------------------

@dataclass(frozen=True)
class BetheSystem:
    """-u_i^-2 Q_i(a0 q^2)/Q_i(a0 q^-2) = prod_{(j,c)} Q_j(a0 q c)/Q_j(a0 q^-1 c)."""

    type_name: str
    node: int
    fixed: bool
    M: int
    factors: tuple

    def render(self):
        def arg(c, e):
            s = f"a0*q^{e}"
            return s if c == SpectralParam(0, 0) else f"{s}*{c.render()}"

        rhs = " * ".join(f"Q_{j}({arg(c, 1)})/Q_{j}({arg(c, -1)})" for j, c in self.factors) or "1"
        i = self.node
        return f"-u_{i}^-2 * Q_{i}(a0*q^2)/Q_{i}(a0*q^-2) = {rhs}"

    def to_json(self):
        return {
            "type": self.type_name,
            "node": self.node,
            "lhs": {"sign": -1, "u_exponent": -2, "ratio": [self.node, 4, -4]},
            "rhs": [[j, c.n, c.m] for j, c in self.factors],
            "text": self.render(),
        }

    def evaluate(self, qfuncs, u, a0, q0):
        """(lhs, rhs) with qfuncs[j] callables on complex numbers."""
        qv = mpmath.mpf(q0)

        def val(c):
            return qv ** (mpmath.mpf(c.n) / 2) * mpmath.expj(2 * mpmath.pi * c.m / 6)

        i = self.node
        lhs = -mpmath.mpf(1) / u**2 * qfuncs[i](a0 * qv**2) / qfuncs[i](a0 * qv**-2)
        rhs = mpmath.mpc(1)
        for j, c in self.factors:
            rhs *= qfuncs[j](a0 * qv * val(c)) / qfuncs[j](a0 / qv * val(c))
        return lhs, rhs


def bethe_equations(fd, i):
    fd = resolve(fd)
    rep, _ = fd.rep_of[i]
    factors = tuple(sorted(qq_rhs_factors(fd, rep)))
    return BetheSystem(fd.name, rep, fd.is_fixed(rep) if fd.M > 1 else False, fd.M, factors)


def numeric_consistency(fd, i, q0="5/4", seed=0, bits=200, samples=3):
    """Build Q-data solving both specialized QQ~ relations at a root and test the ratio form.

    Neighbour Q-functions and the value Q~_i(a0) are random; Q_i is the
    polynomial with Q_i(a0) = 0 fitted to the two specialized relations.
    Returns the worst relative error.
    """
    fd = resolve(fd)
    system = bethe_equations(fd, i)
    rng = random.Random(seed)
    worst = mpmath.mpf(0)
    with mpmath.workprec(bits):
        qv = mpmath.mpf(Fraction(q0).numerator) / Fraction(q0).denominator

        def val(c):
            return qv ** (mpmath.mpf(c.n) / 2) * mpmath.expj(2 * mpmath.pi * c.m / 6)

        def rnd():
            return mpmath.mpc(rng.uniform(-2, 2), rng.uniform(-2, 2))

        for _ in range(samples):
            funcs = {}
            for j, _c in system.factors:
                if j in funcs or j == system.node:
                    continue
                roots = [rnd() for _ in range(3)]
                power = fd.M if (fd.M > 1 and fd.is_fixed(j)) else 1
                funcs[j] = (lambda rs, p: lambda z: mpmath.fprod(z**p - r for r in rs))(roots, power)
            u = rnd()
            a0 = rnd()
            qt = rnd()
            power = fd.M if (fd.M > 1 and system.fixed) else 1
            r0 = a0**power
            c2 = rnd()

            def make_qi(c0, c1, r0=r0, p=power, c2=c2):
                return lambda z: (z**p - r0) * (c0 + c1 * z**p + c2 * z ** (2 * p))

            def residual(c0, c1):
                # -u^-1 Q_i(a0 q^2) Q~_i(a0) = prod Q_j(a0 q c);  u Q_i(a0 q^-2) Q~_i(a0) = prod Q_j(a0 q^-1 c)
                fs = dict(funcs)
                fs[system.node] = make_qi(c0, c1)
                plus = mpmath.fprod(fs[j](a0 * qv * val(c)) for j, c in system.factors)
                minus = mpmath.fprod(fs[j](a0 / qv * val(c)) for j, c in system.factors)
                qi = fs[system.node]
                return [-qi(a0 * qv**2) * qt / u - plus, u * qi(a0 / qv**2) * qt - minus]

            # the residual is affine in (c0, c1) even when Q_i occurs on the right
            r00, r10, r01 = residual(0, 0), residual(1, 0), residual(0, 1)
            A = mpmath.matrix([[r10[k] - r00[k], r01[k] - r00[k]] for k in range(2)])
            c0, c1 = mpmath.lu_solve(A, mpmath.matrix([-r00[0], -r00[1]]))
            funcs[system.node] = make_qi(c0, c1)
            if max(abs(x) for x in residual(c0, c1)) > mpmath.mpf(2) ** (-bits // 2):
                raise ArithmeticError("specialized relations not solved")
            lhs, rhs = system.evaluate(funcs, u, a0, q0=qv)
            rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs))
            worst = max(worst, rel)
    return float(worst)


def degenerate_bethe_check(fd, i):
    """All Q = 1, u = 1: returns (lhs, rhs); they differ, so constant data are inadmissible."""
    system = bethe_equations(fd, i)
    one = lambda z: mpmath.mpf(1)  # noqa: E731
    funcs = {system.node: one, **{j: one for j, _ in system.factors}}
    return system.evaluate(funcs, mpmath.mpf(1), mpmath.mpf(1), q0=mpmath.mpf(1.25))
