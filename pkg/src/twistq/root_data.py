"""Dynkin data, diagram foldings and twisted Cartan data.

Node labels follow the usual conventions: A_n is the chain 1..n, D_n has the
chain 1..n-2 with n-1 and n both attached to n-2, and E_6 is the chain
1-3-4-5-6 with 2 attached to 4.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache

from .field_kernel import CycloRational, determinant, qnumber

EPS = "eps"

# zeta_6 exponent of a primitive M-th root of unity
_OMEGA_M = {1: 0, 2: 3, 3: 2}


def _edges(kind, n):
    if kind == "A":
        return [(i, i + 1) for i in range(1, n)]
    if kind == "D":
        if n < 3:
            raise ValueError("D_n needs n >= 3")
        return [(i, i + 1) for i in range(1, n - 2)] + [(n - 2, n - 1), (n - 2, n)]
    if kind == "E" and n == 6:
        return [(1, 3), (3, 4), (4, 5), (5, 6), (2, 4)]
    raise ValueError(f"unsupported finite type {kind}{n}")


def cartan_matrix(finite_type):
    kind, n = finite_type[0], int(finite_type[1:])
    C = [[0] * n for _ in range(n)]
    for i in range(n):
        C[i][i] = 2
    for a, b in _edges(kind, n):
        C[a - 1][b - 1] = C[b - 1][a - 1] = -1
    return tuple(tuple(r) for r in C)


def standard_sigma(finite_type, M):
    """The diagram automorphism used for each twisted type."""
    kind, n = finite_type[0], int(finite_type[1:])
    if M == 1:
        return tuple(range(1, n + 1))
    if kind == "A" and M == 2:
        return tuple(n + 1 - i for i in range(1, n + 1))
    if kind == "D" and M == 2:
        return tuple(range(1, n - 1)) + (n, n - 1)
    if kind == "E" and n == 6 and M == 2:
        return (6, 2, 5, 4, 3, 1)
    if kind == "D" and n == 4 and M == 3:
        # 1 -> 3 -> 4 -> 1, centre fixed
        return (3, 2, 4, 1)
    raise ValueError(f"no order-{M} automorphism for {finite_type}")


class FoldingDatum:
    """A simply-laced diagram with an automorphism sigma of order M.

    M = 1 (sigma the identity) is allowed and describes the untwisted
    algebra; all folding operations are then the identity.
    """

    def __init__(self, finite_type, sigma=None, M=None, name=None):
        self.finite_type = finite_type
        self.cartan = cartan_matrix(finite_type)
        n = len(self.cartan)
        self.nodes = tuple(range(1, n + 1))
        if sigma is None:
            sigma = standard_sigma(finite_type, M or 1)
        sigma = tuple(sigma)
        if sorted(sigma) != list(self.nodes):
            raise ValueError("sigma is not a permutation of the nodes")
        for i in self.nodes:
            for j in self.nodes:
                if self.C(sigma[i - 1], sigma[j - 1]) != self.C(i, j):
                    raise ValueError("sigma is not a diagram automorphism")
        order = 1
        cur = sigma
        while cur != self.nodes:
            cur = tuple(sigma[c - 1] for c in cur)
            order += 1
        if M is not None and M != order:
            raise ValueError(f"sigma has order {order}, not {M}")
        self.sigma = sigma
        self.M = order
        self.name = name or (finite_type if order == 1 else f"{finite_type}^{order}")
        reps, rep_of = [], {}
        for i in self.nodes:
            if i in rep_of:
                continue
            reps.append(i)
            j = i
            for k in range(order):
                rep_of.setdefault(j, (i, k))
                j = self.sig(j)
        self.reps = tuple(reps)
        self.rep_of = rep_of
        self.omega_m = _OMEGA_M[order]

    def __repr__(self):
        return f"FoldingDatum({self.name})"

    def __eq__(self, other):
        return isinstance(other, FoldingDatum) and self.name == other.name and self.sigma == other.sigma

    def __hash__(self):
        return hash((self.name, self.sigma))

    def C(self, i, j):
        return self.cartan[i - 1][j - 1]

    def sig(self, i, k=1):
        for _ in range(k % self.M):
            i = self.sigma[i - 1]
        return i

    def is_fixed(self, i):
        return self.sig(i) == i

    def N(self, i):
        return self.M if self.is_fixed(i) else 1

    def orbit(self, i):
        out = []
        j = i
        for _ in range(self.M):
            if j not in out:
                out.append(j)
            j = self.sig(j)
        return out

    def neighbors(self, i):
        return [j for j in self.nodes if self.C(i, j) == -1]

    def is_a2n(self):
        return any(self.C(i, self.sig(i)) == -1 for i in self.nodes)

    @property
    def is_twisted(self):
        return self.M > 1

    def unfolded(self):
        return untwisted(self.finite_type)

    def pairing(self, i, j):
        """Exponent b with alpha_j(k_i) = q**b, for representatives i, j."""
        return sum(self.C(i, self.sig(j, r)) for r in range(1, self.M + 1))

    @property
    def B(self):
        return _pairing_matrix(self)

    @property
    def B_inv(self):
        return _pairing_inverse(self)

    def d(self, i):
        return Fraction(self.pairing(i, i), 2)


@lru_cache(maxsize=None)
def _pairing_matrix(fd):
    return tuple(tuple(fd.pairing(i, j) for j in fd.reps) for i in fd.reps)


@lru_cache(maxsize=None)
def _pairing_inverse(fd):
    n = len(fd.reps)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(fd.B)]
    for c in range(n):
        piv = next(r for r in range(c, n) if a[r][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return tuple(tuple(row[n:]) for row in a)


class TwistedCartan:
    """Cartan data of the affine algebra attached to a folding datum.

    ``labels`` lists the orbit representatives followed by ``EPS``.  The
    finite part is C_ij = 2 (a_i, a_j) / (a_i, a_i) for the folded inner
    product, and the extra node is delta minus the highest short root
    (twice it when a node is adjacent to its own image).
    """

    def __init__(self, fd):
        self.datum = fd
        reps = fd.reps
        self.labels = reps + (EPS,)
        ip = {(i, j): Fraction(fd.pairing(i, j)) for i in reps for j in reps}
        theta = _highest_short_root(fd, ip)
        if fd.is_a2n():
            theta = {k: 2 * v for k, v in theta.items()}

        def form(x, y):
            return sum(x[i] * y[j] * ip[i, j] for i in reps for j in reps)

        unit = {i: {j: Fraction(int(i == j)) for j in reps} for i in reps}
        neg_theta = {k: -v for k, v in theta.items()}
        vec = dict(unit)
        vec[EPS] = neg_theta
        self.d = {lab: form(vec[lab], vec[lab]) / 2 for lab in self.labels}
        self.C_sigma = {
            (a, b): 2 * form(vec[a], vec[b]) / form(vec[a], vec[a]) for a in self.labels for b in self.labels
        }
        for key, val in self.C_sigma.items():
            if val.denominator != 1:
                raise ArithmeticError(f"non-integral Cartan entry at {key}")
            self.C_sigma[key] = int(val)
        self.N = {i: fd.N(i) for i in fd.nodes}
        self.marks = _marks(self)

    def C(self, a, b):
        return self.C_sigma[a, b]

    def matrix(self):
        return [[self.C(a, b) for b in self.labels] for a in self.labels]


def _highest_short_root(fd, ip):
    reps = fd.reps
    simple = [tuple(int(i == j) for j in reps) for i in reps]

    def form(x, y):
        return sum(x[a] * y[b] * ip[reps[a], reps[b]] for a in range(len(reps)) for b in range(len(reps)))

    roots = set(simple)
    frontier = list(simple)
    while frontier:
        new = []
        for beta in frontier:
            for a, alpha in enumerate(simple):
                # p = largest p with beta - p alpha a root
                p = 0
                while tuple(x - (p + 1) * y for x, y in zip(beta, alpha)) in roots:
                    p += 1
                pair = 2 * form(beta, alpha) / form(alpha, alpha)
                if p - pair > 0:
                    cand = tuple(x + y for x, y in zip(beta, alpha))
                    if cand not in roots:
                        roots.add(cand)
                        new.append(cand)
        frontier = new
    shortest = min(form(r, r) for r in roots)
    short = [r for r in roots if form(r, r) == shortest]
    best = max(short, key=sum)
    return {reps[a]: Fraction(best[a]) for a in range(len(reps))}


def _marks(tc):
    labs = tc.labels
    n = len(labs)
    # solve sum_i a_i d_i C_ij = 0 with a_eps = 1
    rows = [[tc.d[labs[i]] * tc.C(labs[i], labs[j]) for i in range(n - 1)] for j in range(n)]
    rhs = [-(tc.d[EPS] * tc.C(EPS, labs[j])) for j in range(n)]
    a = [row + [r] for row, r in zip(rows, rhs)]
    m = n - 1
    r = 0
    piv_cols = []
    for c in range(m):
        piv = next((k for k in range(r, n) if a[k][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for k in range(n):
            if k != r and a[k][c] != 0:
                f = a[k][c]
                a[k] = [x - f * y for x, y in zip(a[k], a[r])]
        piv_cols.append(c)
        r += 1
    if any(a[k][m] != 0 for k in range(r, n)) or len(piv_cols) != m:
        raise ArithmeticError("marks are not uniquely determined")
    sol = {labs[c]: a[k][m] for k, c in enumerate(piv_cols)}
    sol[EPS] = Fraction(1)
    for lab, v in sol.items():
        if v.denominator != 1 or v <= 0:
            raise ArithmeticError(f"mark at {lab} is not a positive integer: {v}")
    return {lab: int(sol[lab]) for lab in labs}


_TYPE_RE = re.compile(r"^([ADE])(\d+)(?:\^([23]))?$")


@lru_cache(maxsize=None)
def build_type(name):
    """Resolve "A3^2", "D4^3", "E6^2" (or an untwisted "A2") to a datum."""
    m = _TYPE_RE.match(name.replace("(", "").replace(")", ""))
    if not m:
        raise ValueError(f"unknown type name {name!r}")
    finite = m.group(1) + m.group(2)
    M = int(m.group(3) or 1)
    return FoldingDatum(finite, M=M, name=name if M > 1 else finite)


def untwisted(finite_type):
    return build_type(finite_type)


def build_twisted(finite_type, sigma):
    """Return (FoldingDatum, TwistedCartan) for a nontrivial automorphism."""
    fd = FoldingDatum(finite_type, sigma=sigma)
    if fd.M == 1:
        raise ValueError("sigma is the identity")
    return fd, twisted_cartan(fd)


@lru_cache(maxsize=None)
def twisted_cartan(fd):
    return TwistedCartan(fd)


def omega(fd):
    return CycloRational.zeta(fd.M) if fd.M == 3 else CycloRational.const(-1 if fd.M == 2 else 1)


class FkMatrix:
    def __init__(self, k, labels, entries):
        self.k = k
        self.labels = labels
        self.entries = entries

    def rows(self, labels=None):
        labels = labels or self.labels
        return [[self.entries[a, b] for b in labels] for a in labels]


def f_matrix(fd, k):
    """The matrix of loop-generator commutation coefficients at degree k."""
    if k == 0:
        raise ValueError("k must be nonzero")
    w = omega(fd)
    entries = {}
    for i in fd.reps:
        di = fd.d(i)
        for j in fd.reps:
            total = CycloRational.const(0)
            for r in range(1, fd.M + 1):
                c = fd.C(i, fd.sig(j, r))
                if c:
                    total = total + qnumber(Fraction(k * c) / di, di) * w ** ((k * r) % fd.M)
            entries[i, j] = total
    return FkMatrix(k, fd.reps, entries)


def det_f(fd, k):
    if k % fd.M:
        raise ValueError(f"det_f needs M | k (M={fd.M}, k={k})")
    return determinant(f_matrix(fd, k).rows())


def det_f_prime(fd, k):
    if k % fd.M == 0:
        raise ValueError(f"det_f_prime needs M not dividing k (M={fd.M}, k={k})")
    labs = [i for i in fd.reps if not fd.is_fixed(i)]
    return determinant(f_matrix(fd, k).rows(labs))


def _qn(m, base):
    """[m] at base q**base for integer base >= 1."""
    return qnumber(m, base)


def closed_form(fd, k):
    """Closed form of det F(k) when M | k, or of det F'(k) otherwise."""
    kind, n_fin = fd.finite_type[0], int(fd.finite_type[1:])
    M = fd.M
    c = CycloRational.const
    if fd.is_a2n():
        raise ValueError("no closed form is listed for this family")
    if M == 2 and kind == "A":
        n = (n_fin + 1) // 2
        if k % 2 == 0:
            kk = k // 2
            return c(2) * _qn(2, kk) ** (n - 1) * _qn(2, 2 * n * kk) * _qn(kk, 1) ** (n - 1) * _qn(kk, 2)
        return _qn(n, k) * _qn(k, 1) ** (n - 1)
    if M == 2 and kind == "D":
        n = n_fin - 1
        if k % 2 == 0:
            kk = k // 2
            return c(2) ** (n - 1) * _qn(2, kk) * _qn(2, 2 * n * kk) * _qn(kk, 1) * _qn(kk, 2) ** (n - 1)
        return _qn(2, k) * _qn(k, 1)
    if M == 2 and kind == "E":
        if k % 2 == 0:
            kk = k // 2
            return c(4) * _qn(2, kk) ** 2 * _qn(3, 4 * kk) * _qn(kk, 1) ** 2 * _qn(kk, 2) ** 2
        return _qn(3, k) * _qn(k, 1) ** 2
    if M == 3:
        if k % 3 == 0:
            kk = k // 3
            return c(3) * _qn(3, kk) * _qn(2, 9 * kk) * _qn(kk, 1) * _qn(kk, 3) / _qn(2, 3 * kk)
        return _qn(2, k) * _qn(k, 1)
    raise ValueError(f"no closed form for {fd.name}")
