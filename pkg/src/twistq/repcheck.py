"""Explicit infinite-dimensional modules over Borel subalgebras.

Four modules are built in: the negative and positive prefundamental modules
of type A_2^(2), the module L(Psi~_{1,1}) of type A_2^(2), and its sl_3
counterpart.  Each is truncated at total height N; operators keep track of
the height up to which their columns are exact, so relations are only
asserted where no truncated vector can leak in.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import flint

from .field_kernel import CycloRational, nullspace, qfactorial, qnumber, rref
from .lweights import LWeight, QCharacter, SpectralParam
from .root_data import build_type


def Q(e):
    return CycloRational.q_power(Fraction(e))


ONE = CycloRational.const(1)
ZERO = CycloRational.const(0)
q = Q(1)


class TranscriptionError(ValueError):
    """A coefficient sends a basis vector outside the index range."""


class PreconditionError(ValueError):
    pass


class NonLatticeWeight(ArithmeticError):
    """A generalized eigenvalue series is not a lattice l-weight."""


# --- coefficient table --------------------------------------------------------
#
# Each entry: basis kind, k-eigenvalue exponents, e-actions as
# {target: coefficient}.  Coefficients are transcribed as written, the field
# kernel normalizes them.

def _neg_e1(i, j):
    return {
        (i - 1, j): Q(2 * i) - 1,
        (i, j - 1): (Q(2 * j + 1) + 1) * (Q(2 * j) - Q(2 * i)) * Q(i - j + 3)
        / ((q - 1) ** 2 * (q + 1) * (Q(2 * i + 1) + Q(2 * j)) * (Q(2 * i) + Q(2 * j + 1))),
    }


def _neg_eeps(i, j):
    h = Fraction(1, 2)
    return {
        (i, j + 2): Q(2 * i + 5 * h) * (q - 1) * (q + 1) / (q**2 + 1),
        (i + 1, j + 1): (q + 1) * Q(i + 3 * j + 5 + h)
        / ((q - 1) * (Q(2 * i + 1) + Q(2 * j)) * (Q(2 * i) + Q(2 * j + 3))),
        (i + 2, j): -(Q(2 * j) - Q(2 * i)) * (Q(2 * j) - Q(2 * i + 2)) * Q(-2 * i + 4 * j + 5 + h)
        / (
            (q**2 + 1) * (q - 1) ** 3 * (q + 1)
            * (Q(2 * i + 1) + Q(2 * j)) ** 2 * (Q(2 * i + 3) + Q(2 * j)) * (Q(2 * i) + Q(2 * j + 1))
        ),
    }


def _pos_e1(i, j):
    return {
        (i - 1, j): (Q(2 * i) - 1) * Q(3 * i - j + Fraction(7, 2))
        / ((q - 1) ** 2 * (Q(2 * i) + Q(2 * j + 1)) * (Q(2 * i) + Q(2 * j + 3))),
        (i, j - 1): -Q(-4 * i - 2 * j + Fraction(5, 2)) * (q + 1) * (Q(2 * j + 1) + 1) * (Q(2 * j) - Q(2 * i)),
    }


def _pos_eeps(i, j):
    return {
        (i, j + 2): -Q(8 * i + 6 * j + Fraction(19, 2))
        / (
            (q**2 - 1) ** 3 * (q**2 + 1)
            * (Q(2 * i) + Q(2 * j + 3)) ** 2 * (Q(2 * i) + Q(2 * j + 5)) * (Q(2 * i) + Q(2 * j + 1))
        ),
        (i + 1, j + 1): Q(3 * i + 5 * j + Fraction(7, 2))
        / ((q**2 - 1) * (Q(2 * i + 1) + Q(2 * j)) * (Q(2 * i) + Q(2 * j + 3))),
        (i + 2, j): Q(-4 * i + 2 * j - Fraction(5, 2)) * (q - 1) * (Q(2 * j) - Q(2 * i + 2)) * (Q(2 * j) - Q(2 * i))
        / ((q**2 + 1) * (q + 1)),
    }


def _x_e1(j):
    return {(j - 1,): Q(2 * j) - 1}


def _x_eeps(j):
    return {(j + 2,): Q(-2 * j + Fraction(7, 2)) / ((q - 1) ** 3 * (q + 1) * (q**2 + 1))}


def _qn(n):
    return qnumber(n, 1) if n else ZERO


def _sl3_e1(j, k):
    return {(j, k - 1): Q(j) * _qn(k)}


def _sl3_e2(j, k):
    return {(j - 1, k): _qn(j)}


def _sl3_e0(j, k):
    return {(j + 1, k + 1): Q(-k + 6) / (q - q.inverse())}


_A2T = {
    "type": "A2^2",
    "labels": (1, "eps"),
    "d": {1: Fraction(1, 2), "eps": Fraction(2)},
    "C": {(1, 1): 2, (1, "eps"): -4, ("eps", 1): -1, ("eps", "eps"): 2},
    "marks": {1: 2, "eps": 1},
    "shift": {1: -1, "eps": 2},
}

_SL3 = {
    "type": "A2",
    "labels": (0, 1, 2),
    "d": {0: Fraction(1), 1: Fraction(1), 2: Fraction(1)},
    "C": {(a, b): (2 if a == b else -1) for a in (0, 1, 2) for b in (0, 1, 2)},
    "marks": {0: 1, 1: 1, 2: 1},
    "shift": {0: 2, 1: -1, 2: -1},
}

BUILTIN = {
    "neg_prefund_A2t": dict(
        _A2T,
        basis="ij",
        k={1: lambda i, j: -i - j, "eps": lambda i, j: 2 * i + 2 * j},
        e={1: _neg_e1, "eps": _neg_eeps},
    ),
    "pos_prefund_A2t": dict(
        _A2T,
        basis="ij",
        k={1: lambda i, j: -i - j, "eps": lambda i, j: 2 * i + 2 * j},
        e={1: _pos_e1, "eps": _pos_eeps},
    ),
    "X_A2t": dict(
        _A2T,
        basis="j",
        k={1: lambda j: -j, "eps": lambda j: 2 * j},
        e={1: _x_e1, "eps": _x_eeps},
    ),
    "Xtilde_sl3": dict(
        _SL3,
        basis="jk",
        k={1: lambda j, k: j - 2 * k, 2: lambda j, k: k - 2 * j, 0: lambda j, k: j + k},
        e={1: _sl3_e1, 2: _sl3_e2, 0: _sl3_e0},
    ),
}


def _enumerate(kind, N):
    if kind == "ij":
        return [(i, t - i) for t in range(N + 1) for i in range(t // 2 + 1)]
    if kind == "j":
        return [(j,) for j in range(N + 1)]
    if kind == "jk":
        return [(j, t - j) for t in range(N + 1) for j in range(t + 1)]
    raise ValueError(kind)


def _valid(kind, lab):
    if kind == "ij":
        return 0 <= lab[0] <= lab[1]
    return all(x >= 0 for x in lab)


# --- sparse operators with exactness bookkeeping ------------------------------

class SparseOp:
    """A homogeneous operator; ``cols[v]`` is exact for height(v) <= exact."""

    __slots__ = ("cols", "shift", "exact", "height")

    def __init__(self, cols, shift, exact, height):
        self.cols = cols
        self.shift = shift
        self.exact = exact
        self.height = height

    def __matmul__(self, other):
        exact = min(other.exact, self.exact - other.shift)
        cols = {}
        for v, col in other.cols.items():
            if other.height(v) > exact:
                continue
            out = {}
            for w, c in col.items():
                for x, d in self.cols[w].items():
                    out[x] = out[x] + c * d if x in out else c * d
            cols[v] = {x: y for x, y in out.items() if not y.is_zero()}
        return SparseOp(cols, self.shift + other.shift, exact, self.height)

    def __add__(self, other):
        if self.shift != other.shift:
            raise ValueError("adding operators of different degrees")
        exact = min(self.exact, other.exact)
        cols = {}
        for v, col in self.cols.items():
            if self.height(v) > exact:
                continue
            out = dict(col)
            for x, d in other.cols[v].items():
                out[x] = out[x] + d if x in out else d
            cols[v] = {x: y for x, y in out.items() if not y.is_zero()}
        return SparseOp(cols, self.shift, exact, self.height)

    def scale(self, c):
        c = c if isinstance(c, CycloRational) else CycloRational.const(c)
        if c.is_zero():
            return SparseOp({v: {} for v in self.cols}, self.shift, self.exact, self.height)
        return SparseOp({v: {x: y * c for x, y in col.items()} for v, col in self.cols.items()}, self.shift, self.exact, self.height)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def commutator(self, other):
        return self @ other - other @ self

    def interior(self):
        return [v for v in self.cols if self.height(v) <= self.exact]

    def residual(self):
        """First interior basis vector with a nonzero image, or None."""
        for v in sorted(self.interior(), key=lambda v: (self.height(v), v)):
            if self.cols[v]:
                return v
        return None

    def apply(self, v):
        return dict(self.cols[v])


@dataclass
class TruncationMask:
    bound: int

    def interior(self, op):
        return op.interior()


class GradedModule:
    """A truncated module given by exact k-eigenvalues and e-actions."""

    def __init__(self, name, spec, bound, kexp, eact, basis, height):
        self.name = name
        self.spec = spec
        self.type = spec["type"]
        self.labels = spec["labels"]
        self.mask = TruncationMask(bound)
        self.basis = basis
        self.height = height
        self.kexp = kexp
        self.eact = eact
        self.e = {}
        self.k = {}
        self.kinv = {}
        for a in self.labels:
            sh = spec["shift"][a]
            cols = {}
            for v in basis:
                col = {}
                for w, c in eact(a, v).items():
                    if c.is_zero():
                        continue
                    if w in self._index:
                        col[w] = c
                    elif self._in_range(w):
                        raise TranscriptionError(f"{name}: e_{a} sends {v} to index {w} outside the basis")
                cols[v] = col
            self.e[a] = SparseOp(cols, sh, bound - max(sh, 0), height)
            self.k[a] = SparseOp({v: {v: Q(kexp(a, v))} for v in basis}, 0, bound, height)
            self.kinv[a] = SparseOp({v: {v: Q(-kexp(a, v))} for v in basis}, 0, bound, height)

    @property
    def _index(self):
        if not hasattr(self, "_idx"):
            self._idx = set(self.basis)
        return self._idx

    def _in_range(self, w):
        return self.height_or_none(w) is not None and self.height(w) <= self.mask.bound

    def height_or_none(self, w):
        try:
            if not self.valid(w):
                return None
        except Exception:
            return None
        return self.height(w)

    def valid(self, w):
        return _valid(self.spec["basis"], w)

    def identity(self):
        return SparseOp({v: {v: ONE} for v in self.basis}, 0, self.mask.bound, self.height)

    def weight(self, v):
        return tuple(self.kexp(a, v) for a in self.labels)

    def highest(self):
        return min(self.basis, key=self.height)

    def __repr__(self):
        return f"GradedModule({self.name}, N={self.mask.bound}, dim={len(self.basis)})"


def load_builtin(name, bound=10, fault=None):
    """Load a built-in module truncated at height `bound`.

    `fault` names a generator whose coefficients get a sign flip on one target;
    it exists only to exercise the relation checkers.
    """
    if name not in BUILTIN:
        raise KeyError(f"unknown module {name!r}; available: {', '.join(sorted(BUILTIN))}")
    spec = BUILTIN[name]
    basis = _enumerate(spec["basis"], bound)

    def eact(a, v):
        out = spec["e"][a](*v)
        if a == fault and out:
            first = min(out, key=repr)
            out = dict(out)
            out[first] = -out[first]
        return out

    return GradedModule(
        name,
        spec,
        bound,
        kexp=lambda a, v: spec["k"][a](*v),
        eact=eact,
        basis=basis,
        height=sum,
    )


def tensor(m1, m2, bound=None):
    """m1 (x) m2 with e acting by e (x) 1 + k (x) e, truncated by total height."""
    if m1.spec["labels"] != m2.spec["labels"]:
        raise ValueError("tensor of modules over different algebras")
    bound = bound if bound is not None else min(m1.mask.bound, m2.mask.bound)
    basis = [(a, b) for a in m1.basis for b in m2.basis if m1.height(a) + m2.height(b) <= bound]

    def eact(g, v):
        a, b = v
        out = {}
        for a2, c in m1.eact(g, a).items():
            if m1.valid(a2):
                out[(a2, b)] = c
        kc = Q(m1.kexp(g, a))
        for b2, c in m2.eact(g, b).items():
            if m2.valid(b2):
                out[(a, b2)] = out.get((a, b2), ZERO) + kc * c
        return out

    spec = dict(m1.spec, basis="pair")
    mod = GradedModule.__new__(GradedModule)
    mod.valid = lambda w: m1.valid(w[0]) and m2.valid(w[1])
    GradedModule.__init__(
        mod,
        f"{m1.name}*{m2.name}",
        spec,
        bound,
        kexp=lambda g, v: m1.kexp(g, v[0]) + m2.kexp(g, v[1]),
        eact=eact,
        basis=basis,
        height=lambda v: m1.height(v[0]) + m2.height(v[1]),
    )
    return mod


# --- presentation -------------------------------------------------------------

def _check(name, op):
    bad = op.residual()
    entry = {"relation": name, "vectors_checked": len(op.interior()), "status": "pass" if bad is None else "fail"}
    if bad is not None:
        entry["first_failure"] = str(bad)
    return entry


def _power(op, n, ident):
    out = ident
    for _ in range(n):
        out = op @ out
    return out


def verify_presentation(m):
    """Check Weyl, central and Serre relations on all interior vectors."""
    spec = m.spec
    d, C, labels = spec["d"], spec["C"], spec["labels"]
    ident = m.identity()
    report = []
    for a in labels:
        for b in labels:
            lhs = m.k[a] @ m.e[b] @ m.kinv[a]
            report.append(_check(f"k_{a} e_{b} k_{a}^-1 = q^{d[a] * C[a, b]} e_{b}", lhs - m.e[b].scale(Q(d[a] * C[a, b]))))
    central = ident
    for a in labels:
        for _ in range(spec["marks"][a]):
            central = m.k[a] @ central
    report.append(_check("prod k^marks = 1", central - ident))
    for a in labels:
        for b in labels:
            if a == b:
                continue
            n = 1 - C[a, b]
            total = None
            for r in range(n + 1):
                coeff = (qfactorial(n - r, d[a]) * qfactorial(r, d[a])).inverse() * (-1) ** r
                word = (_power(m.e[a], n - r, ident) @ m.e[b] @ _power(m.e[a], r, ident)).scale(coeff)
                total = word if total is None else total + word
            report.append(_check(f"Serre(e_{a}^{n}, e_{b})", total))
    return report


def report_ok(report):
    return all(r["status"] == "pass" for r in report)


# --- Drinfeld generators --------------------------------------------------------

@dataclass
class DrinfeldData:
    nodes: tuple
    xp: dict = field(default_factory=dict)
    xm: dict = field(default_factory=dict)
    phi: dict = field(default_factory=dict)
    h1: dict = field(default_factory=dict)


# Loop-generator normalizations for sl_3: x^-_{i,1} = c_i k_i (e_0 e_j - q^-1 e_j e_0).
# The constants fix the spectral normalization so that the top l-weight of the
# built-in module is Psi~_{1,1}.
SL3_XMINUS = {1: -Q(-3), 2: Q(-3)}


def drinfeld_generators(m, max_m):
    """x^+_{i,p} (p <= max_m), x^-_{i,p} (1 <= p <= max_m), phi_{i,p} (p <= max_m)."""
    if m.type == "A2^2":
        s = Q(Fraction(1, 2))
        e1, ee, k1 = m.e[1], m.e["eps"], m.k[1]
        xm1 = (k1 @ (ee @ e1 - (e1 @ ee).scale(Q(-2)))).scale(-1)
        data = DrinfeldData(nodes=(1,))
        _recursion(m, data, 1, e1, xm1, m.kinv[1], (s - s.inverse()) / ((q - q.inverse()) * (q + 1 + q.inverse())), s - s.inverse(), max_m)
        return data
    if m.type == "A2":
        data = DrinfeldData(nodes=(1, 2))
        for i in (1, 2):
            j = 3 - i
            e0, ej = m.e[0], m.e[j]
            xm1 = (m.k[i] @ (e0 @ ej - (ej @ e0).scale(q.inverse()))).scale(SL3_XMINUS[i])
            _recursion(m, data, i, m.e[i], xm1, m.kinv[i], qnumber(2, 1).inverse(), q - q.inverse(), max_m)
        return data
    raise ValueError(f"no Drinfeld recipe for {m.type}")


def _recursion(m, data, i, xp0, xm1, kinv, c, cphi, max_m):
    h1 = kinv @ xp0.commutator(xm1)
    data.h1[i] = h1
    data.xp[i, 0] = xp0
    data.xm[i, 1] = xm1
    for p in range(max_m):
        data.xp[i, p + 1] = h1.commutator(data.xp[i, p]).scale(c)
        if p >= 1:
            data.xm[i, p + 1] = h1.commutator(data.xm[i, p]).scale(-c)
    data.phi[i, 0] = m.k[i]
    for p in range(max_m):
        data.phi[i, p + 1] = data.xp[i, p].commutator(xm1).scale(cphi)


def verify_drinfeld(m, data):
    """Consistency of the generated loop elements."""
    report = []
    keys = sorted(k for k in data.phi if k[1] >= 1)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            ka, kb = keys[a], keys[b]
            report.append(_check(f"[phi_{ka}, phi_{kb}] = 0", data.phi[ka].commutator(data.phi[kb])))
    for i in data.nodes:
        pmax = max(p for (j, p) in data.xm if j == i)
        for total in range(2, pmax + 1):
            ref = data.xp[i, 0].commutator(data.xm[i, total])
            for kk in range(1, total):
                if (i, kk) in data.xp and (i, total - kk) in data.xm:
                    report.append(
                        _check(
                            f"[x+_{i},{kk}, x-_{i},{total - kk}] = [x+_{i},0, x-_{i},{total}]",
                            data.xp[i, kk].commutator(data.xm[i, total - kk]) - ref,
                        )
                    )
    if m.type == "A2":
        for i in (1, 2):
            j = 3 - i
            report.append(_check(f"[e_{j}, x-_{i},1] = 0", m.e[j].commutator(data.xm[i, 1])))
    return report


# --- generalized l-weight spaces ----------------------------------------------

_CTX = flint.fmpq_mpoly_ctx.get(("s", "x"), "lex")


def _dense(op, block):
    idx = {v: n for n, v in enumerate(block)}
    A = [[ZERO] * len(block) for _ in block]
    for c, v in enumerate(block):
        for x, val in op.cols[v].items():
            if x not in idx:
                raise ArithmeticError(f"operator leaves the weight space of {v}")
            A[idx[x]][c] = val
    return A


def _matmul(A, B):
    n, k, p = len(A), len(B), len(B[0]) if B else 0
    return [[sum((A[r][t] * B[t][c] for t in range(k)), ZERO) for c in range(p)] for r in range(n)]


def _charpoly(A):
    """Coefficients c_0..c_d of det(x - A) by Faddeev-LeVerrier."""
    n = len(A)
    coeffs = [ZERO] * (n + 1)
    coeffs[n] = ONE
    Mk = [[ZERO] * n for _ in range(n)]
    for k in range(1, n + 1):
        Mk = _matmul(A, Mk)
        for r in range(n):
            Mk[r][r] = Mk[r][r] + coeffs[n - k + 1]
        AM = _matmul(A, Mk)
        coeffs[n - k] = -sum((AM[r][r] for r in range(n)), ZERO) / k
    return coeffs


def _to_mpoly(coeffs):
    """Clear denominators of a polynomial in x over Q(s)."""
    den = flint.fmpq_poly([1])
    for c in coeffs:
        den = den * c.den / den.gcd(c.den)
    terms = {}
    for ex, c in enumerate(coeffs):
        p = c.num[0] * den / c.den
        for es, v in enumerate(p.coeffs()):
            if v != 0:
                terms[(es, ex)] = v
    return _CTX.from_dict(terms)


def _from_spoly(poly):
    """fmpq_mpoly in s alone -> CycloRational."""
    cs = {}
    for (es, ex), v in poly.to_dict().items():
        cs[es] = v
    deg = max(cs) if cs else 0
    return CycloRational([flint.fmpq_poly([cs.get(k, 0) for k in range(deg + 1)])])


def _linear_roots(coeffs):
    """Roots in Q(s) of a polynomial in x, with multiplicities; raises if not split."""
    poly = _to_mpoly(coeffs)
    out = {}
    for f, mult in poly.factor()[1]:
        dx = f.degrees()[1]
        if dx == 0:
            continue
        if dx != 1:
            raise NonLatticeWeight(f"irreducible factor {f} does not split over Q(q^(1/2))")
        a1 = {}
        a0 = {}
        for (es, ex), v in f.to_dict().items():
            (a1 if ex == 1 else a0)[(es, 0)] = v
        lam = -_from_spoly(_CTX.from_dict(a0)) / _from_spoly(_CTX.from_dict(a1)) if a0 else ZERO
        out[lam] = out.get(lam, 0) + mult
    return out


def _eigenvalues(R):
    d = len(R)
    if d == 1:
        return {R[0][0]: 1}
    if all(R[r][c].is_zero() for r in range(d) for c in range(r)) or all(
        R[r][c].is_zero() for r in range(d) for c in range(r + 1, d)
    ):
        out = {}
        for r in range(d):
            out[R[r][r]] = out.get(R[r][r], 0) + 1
        return out
    tr = sum((R[r][r] for r in range(d)), ZERO) / d
    N = [[R[r][c] - (tr if r == c else ZERO) for c in range(d)] for r in range(d)]
    P = N
    for _ in range(d - 1):
        P = _matmul(P, N)
    if all(x.is_zero() for row in P for x in row):
        return {tr: d}
    return _linear_roots(_charpoly(R))


def _restrict(A, rows, pivots):
    """Matrix of A on span(rows); rows are in reduced echelon form."""
    d = len(rows)
    R = [[ZERO] * d for _ in range(d)]
    for c, v in enumerate(rows):
        Av = [sum((A[r][t] * v[t] for t in range(len(v)) if not v[t].is_zero()), ZERO) for r in range(len(A))]
        for r, pc in enumerate(pivots):
            R[r][c] = Av[pc]
    return R


def _simultaneous(block_ops, dim):
    """Split C^dim into joint generalized eigenspaces of commuting matrices.

    block_ops: list of (key, matrix).  Returns list of (dimension, {key: eigenvalue}).
    """
    ident = [[ONE if r == c else ZERO for c in range(dim)] for r in range(dim)]
    spaces = [(ident, list(range(dim)), {})]
    for key, A in block_ops:
        nxt = []
        for rows, piv, eig in spaces:
            R = _restrict(A, rows, piv)
            vals = _eigenvalues(R)
            if len(vals) == 1:
                (lam,) = vals
                nxt.append((rows, piv, dict(eig, **{repr(key): lam})))
                continue
            d = len(R)
            for lam, mult in vals.items():
                S = [[R[r][c] - (lam if r == c else ZERO) for c in range(d)] for r in range(d)]
                P = S
                for _ in range(mult - 1):
                    P = _matmul(P, S)
                ker = nullspace(P, d)
                vecs = [[sum((w[r] * rows[r][t] for r in range(d)), ZERO) for t in range(dim)] for w in ker]
                red, pv = rref(vecs)
                red = red[: len(pv)]
                nxt.append((red, pv, dict(eig, **{repr(key): lam})))
        spaces = nxt
    return [(len(rows), eig) for rows, piv, eig in spaces]


def _pade(series, max_deg=None):
    """Smallest-degree P/Q (Q(0) = 1) matching the series; returns (num, den) coefficient lists."""
    P = len(series) - 1
    max_deg = max_deg if max_deg is not None else (P - 2) // 2
    for D in range(max_deg + 1):
        # unknowns b_1..b_D; equations for k = D+1..P: sum_r b_r c_{k-r} = 0 (b_0 = 1)
        rows = []
        for k in range(D + 1, P + 1):
            rows.append([series[k - r] for r in range(1, D + 1)] + [-series[k]])
        if D == 0:
            if all(r[-1].is_zero() for r in rows):
                return [series[0]], [ONE]
            continue
        red, piv = rref(rows)
        if D in piv:
            continue
        if len(piv) < D:
            continue
        b = [ONE] + [ZERO] * D
        for r, pc in enumerate(piv):
            b[pc + 1] = red[r][D]
        num = [sum((b[r] * series[k - r] for r in range(min(k, D) + 1)), ZERO) for k in range(D + 1)]
        return num, b
    raise NonLatticeWeight("series is not rational of low degree within the computed window")


def _lattice_factors(coeffs):
    """Write a polynomial in u with constant term 1 as prod (1 - b u)^m over lattice points."""
    while len(coeffs) > 1 and coeffs[-1].is_zero():
        coeffs = coeffs[:-1]
    if len(coeffs) == 1:
        return {}
    out = {}
    for root, mult in _linear_roots(coeffs).items():
        # root u0 of p(u): factor (1 - u/u0), so b = 1/u0
        b = root.inverse()
        mono = b.monomial_exponent()
        if mono is None or abs(mono[0]) != 1:
            raise NonLatticeWeight(f"root {root} is not of the form +-q^(n/2)")
        out[SpectralParam(mono[1], 0 if mono[0] == 1 else 3)] = mult
    return out


def series_to_function(series, max_deg=None):
    """(q-exponent of the constant term, {root: multiplicity}) of a rational series."""
    num, den = _pade(series, max_deg)
    c0 = num[0]
    mono = c0.monomial_exponent()
    if mono is None or mono[0] != 1:
        raise NonLatticeWeight(f"constant term {c0} is not a power of q^(1/2)")
    roots = _lattice_factors([c / c0 for c in num])
    for b, mlt in _lattice_factors(den).items():
        roots[b] = roots.get(b, 0) - mlt
    return Fraction(mono[1], 2), {b: v for b, v in roots.items() if v}


def _datum(m):
    return build_type(m.type)


def _default_series_len(m):
    return 16


def module_lweights(m, data=None, max_m=None):
    """Joint generalized l-weights: list of (height, LWeight, dimension)."""
    max_m = max_m or _default_series_len(m)
    data = data or drinfeld_generators(m, max_m)
    fd = _datum(m)
    exact = min(op.exact for op in data.phi.values())
    blocks = {}
    for v in m.basis:
        if m.height(v) <= exact:
            blocks.setdefault(m.weight(v), []).append(v)
    out = []
    for wt, block in sorted(blocks.items(), key=lambda kv: m.height(kv[1][0])):
        ops = [((i, p), _dense(data.phi[i, p], block)) for i in data.nodes for p in range(1, max_m + 1)]
        for dim, eig in _simultaneous(ops, len(block)):
            const, roots = [], []
            for i in fd.reps:
                series = [data.phi[i, 0].cols[block[0]][block[0]]] + [eig[repr((i, p))] for p in range(1, max_m + 1)]
                c, r = series_to_function(series)
                const.append(c)
                roots.append(r)
            out.append((m.height(block[0]), LWeight(fd, const, roots), dim))
    return out, exact


def qchar_from_module(m, max_m=None):
    """The truncated q-character read off from generalized phi-eigenspaces."""
    weights, exact = module_lweights(m, max_m=max_m)
    fd = _datum(m)
    terms = {}
    top = None
    for h, w, dim in weights:
        terms[w] = terms.get(w, 0) + dim
        if h == 0:
            top = w.const
    return QCharacter(fd, terms, top, exact)


def highest_lweight(m, max_m=None):
    weights, _ = module_lweights(_shrink(m, 3), max_m=max_m)
    heads = [w for h, w, _ in weights if h == 0]
    if len(heads) != 1:
        raise ArithmeticError("highest weight space is not one-dimensional")
    return heads[0]


def _shrink(m, bound):
    if m.mask.bound <= bound:
        return m
    if m.name in BUILTIN:
        return load_builtin(m.name, bound)
    return m


def verify_phi_vanishing(m, max_m=None, extra_points=()):
    """phi_{i,p} v = 0 for large p, and phi_i(u0) v = 0 at zeros u0 of the top l-weight."""
    max_m = max_m or _default_series_len(m)
    top = highest_lweight(m, max_m)
    if any(mlt < 0 for r in top.roots for _, mlt in r):
        raise PreconditionError(f"{m.name}: highest l-weight is not polynomial: {top.render()}")
    data = drinfeld_generators(m, max_m)
    fd = _datum(m)
    report = []
    exact = min(op.exact for op in data.phi.values())
    interior = [v for v in m.basis if m.height(v) <= exact]
    for i in data.nodes:
        worst = 0
        ok = True
        for v in interior:
            last = max((p for p in range(max_m + 1) if data.phi[i, p].cols[v]), default=-1)
            worst = max(worst, last + 1)
            if last >= max_m - 1:
                ok = False
        report.append(
            {
                "relation": f"phi_{i},p v = 0 for p >= cutoff",
                "vectors_checked": len(interior),
                "status": "pass" if ok else "fail",
                "cutoff": worst,
            }
        )
    points = []
    for i, roots in zip(fd.reps, top.roots):
        for b, _ in roots:
            points.append((i, b.inverse()))
    points += list(extra_points)
    for i, u0 in points:
        u0v = u0.value()
        bad = None
        for v in interior:
            acc = {}
            for p in range(max_m + 1):
                for x, c in data.phi[i, p].cols[v].items():
                    acc[x] = acc.get(x, ZERO) + c * u0v**p
            if any(not c.is_zero() for c in acc.values()):
                bad = v
                break
        entry = {
            "relation": f"phi_{i}(u={u0.render()}) v = 0",
            "vectors_checked": len(interior),
            "status": "pass" if bad is None else "fail",
        }
        if bad is not None:
            entry["first_failure"] = str(bad)
        report.append(entry)
    return report


def verify_coproduct_on_highest(m1, m2, max_m=None):
    """On v0 (x) v0: x^+ acts by 0 and phi acts by the product of the top l-weights."""
    max_m = max_m or _default_series_len(m1)
    w1 = highest_lweight(m1, max_m)
    w2 = highest_lweight(m2, max_m)
    t = tensor(_shrink(m1, 3), _shrink(m2, 3), 3)
    data = drinfeld_generators(t, max_m)
    v0 = (m1.highest(), m2.highest())
    expected = w1 * w2
    report = []
    for i in data.nodes:
        want = expected.series(i, max_m)
        bad = None
        for p in range(max_m + 1):
            col = data.phi[i, p].cols[v0]
            off = {x: c for x, c in col.items() if x != v0}
            if off or col.get(v0, ZERO) != want[p]:
                bad = p
                break
        entry = {"relation": f"phi_{i}(u) on v0 (x) v0 = top l-weight product", "vectors_checked": max_m + 1, "status": "pass" if bad is None else "fail"}
        if bad is not None:
            entry["first_failure"] = f"phi_{i},{bad}"
        report.append(entry)
        killed = all(not data.xp[i, p].cols[v0] for p in range(max_m + 1))
        report.append({"relation": f"x+_{i},p (v0 (x) v0) = 0", "vectors_checked": max_m + 1, "status": "pass" if killed else "fail"})
    return report, expected
