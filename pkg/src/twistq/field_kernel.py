"""Exact arithmetic in Q(zeta_M)(s), with q = s**2.

Elements are stored as (n_0(s) + n_1(s) z) / d(s) where z is a primitive
M-th root of unity, the n_k and d are rational polynomials in s and d is
monic.  Only M in {1, 2, 3} are supported; for M <= 2 the root of unity is
rational so the numerator has a single component.
"""
from __future__ import annotations

import ast
from fractions import Fraction
from functools import lru_cache

import flint
import mpmath

_Poly = flint.fmpq_poly
_ZERO = _Poly([])
_ONE = _Poly([1])
_S = _Poly([0, 1])


def _field_key(M):
    if M in (1, 2):
        return 1
    if M == 3:
        return 3
    raise ValueError(f"unsupported root of unity order M={M}")


def _fq(c):
    c = Fraction(c)
    return flint.fmpq(c.numerator, c.denominator)


def _to_fraction(c):
    return Fraction(int(c.p), int(c.q))


class CycloNum:
    """Element of Q(zeta_M) as coefficients on the basis 1, z, ..., z^(deg-1)."""

    __slots__ = ("M", "coeffs")

    def __init__(self, coeffs, M=1):
        key = _field_key(M)
        coeffs = [Fraction(c) for c in coeffs]
        if key == 1:
            # zeta_2 = -1 is rational; fold any higher coefficients into Q
            z = 1 if M == 1 else -1
            val = sum(c * z**k for k, c in enumerate(coeffs))
            coeffs = [val]
        else:
            # reduce modulo z^2 + z + 1
            coeffs = coeffs + [Fraction(0)] * max(0, 2 - len(coeffs))
            while len(coeffs) > 2:
                top = coeffs.pop()
                k = len(coeffs)
                coeffs[k - 1] -= top
                coeffs[k - 2] -= top
        self.M = M
        self.coeffs = tuple(coeffs)

    @classmethod
    def zeta(cls, M):
        return cls([0, 1], M)

    def _key(self):
        return _field_key(self.M)

    def _lift(self, other):
        if isinstance(other, CycloNum):
            if other._key() == self._key():
                return other
            if other._key() == 1:
                return CycloNum([other.coeffs[0]], self.M)
            if self._key() == 1:
                return None
        if isinstance(other, (int, Fraction)):
            return CycloNum([other], self.M)
        return None

    def _wider(self, other):
        return self if self._key() >= other._key() else other

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented if not isinstance(other, CycloNum) else other + self
        return CycloNum([a + b for a, b in zip(self.coeffs, o.coeffs)], self.M)

    __radd__ = __add__

    def __neg__(self):
        return CycloNum([-c for c in self.coeffs], self.M)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented if not isinstance(other, CycloNum) else other * self
        if self._key() == 1:
            return CycloNum([self.coeffs[0] * o.coeffs[0]], self.M)
        a0, a1 = self.coeffs
        b0, b1 = o.coeffs
        return CycloNum([a0 * b0 - a1 * b1, a0 * b1 + a1 * b0 - a1 * b1], self.M)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self._key() == 1:
            return CycloNum([1 / self.coeffs[0]], self.M)
        a0, a1 = self.coeffs
        norm = a0 * a0 - a0 * a1 + a1 * a1
        return CycloNum([(a0 - a1) / norm, -a1 / norm], self.M)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = CycloNum([1], self.M)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other):
        o = self._lift(other) if not isinstance(other, CycloNum) else other
        if o is None:
            return NotImplemented
        if o._key() != self._key():
            if o._key() == 1:
                o = self._lift(o)
            else:
                return o == self
        return self.coeffs == o.coeffs

    def __hash__(self):
        if self._key() == 1 or self.coeffs[1] == 0:
            return hash(self.coeffs[0])
        return hash(self.coeffs)

    def eval_numeric(self):
        z = mpmath.expj(2 * mpmath.pi / self.M) if self._key() == 3 else 1
        return sum((mpmath.mpf(c.numerator) / c.denominator) * z**k for k, c in enumerate(self.coeffs))

    def __repr__(self):
        return f"CycloNum({[str(c) for c in self.coeffs]}, M={self.M})"


def _poly_str(p, var="s"):
    terms = []
    for k, c in reversed(list(enumerate(p.coeffs()))):
        if c == 0:
            continue
        cf = _to_fraction(c)
        mag = abs(cf)
        sign = "-" if cf < 0 else "+"
        if k == 0:
            body = str(mag)
        else:
            mono = var if k == 1 else f"{var}^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        terms.append((sign, body))
    if not terms:
        return "0"
    out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    for sign, body in terms[1:]:
        out += f" {sign} {body}"
    return out


class CycloRational:
    """Element of Q(zeta_M)(s) in canonical reduced form."""

    __slots__ = ("key", "num", "den", "_hash")

    def __init__(self, num, den=None, M=1, _normalized=False):
        self.key = _field_key(M)
        width = 1 if self.key == 1 else 2
        num = [p if isinstance(p, _Poly) else _Poly(p) for p in num]
        num = num + [_ZERO] * (width - len(num))
        if len(num) != width:
            raise ValueError("numerator has too many components")
        den = _ONE if den is None else (den if isinstance(den, _Poly) else _Poly(den))
        self._hash = None
        if _normalized:
            self.num, self.den = tuple(num), den
            return
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if all(p == 0 for p in num):
            self.num, self.den = tuple(num), _ONE
            return
        g = den
        for p in num:
            if p != 0:
                g = g.gcd(p)
        if g.degree() > 0:
            num = [p // g for p in num]
            den = den // g
        lc = den.coeffs()[-1]
        if lc != 1:
            num = [p / lc for p in num]
            den = den / lc
        self.num, self.den = tuple(num), den

    # constructors -----------------------------------------------------
    @classmethod
    def const(cls, c, M=1):
        if isinstance(c, CycloRational):
            return c
        if isinstance(c, CycloNum):
            key = _field_key(c.M)
            return cls([_Poly([_fq(x)]) for x in c.coeffs], M=key)
        c = Fraction(c)
        return cls([_Poly([_fq(c)])], M=M, _normalized=True)

    @classmethod
    def s_power(cls, n, M=1):
        """The Laurent monomial s**n."""
        if n >= 0:
            return cls([_S**n], M=M, _normalized=True)
        return cls([_ONE], _S ** (-n), M=M, _normalized=True)

    @classmethod
    def q_power(cls, e, M=1):
        """q**e for e an integer or half-integer."""
        e2 = Fraction(e) * 2
        if e2.denominator != 1:
            raise ValueError(f"q-exponent {e} is not a half-integer")
        return cls.s_power(int(e2), M)

    @classmethod
    def zeta(cls, M):
        return cls.const(CycloNum.zeta(M))

    # coercion ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, CycloRational):
            a, b = self, other
        elif isinstance(other, (int, Fraction)):
            a, b = self, CycloRational.const(other)
        elif isinstance(other, CycloNum):
            a, b = self, CycloRational.const(other)
        else:
            return None, None
        if a.key == b.key:
            return a, b
        if a.key == 1:
            return a._widen(b.key), b
        if b.key == 1:
            return a, b._widen(a.key)
        raise ValueError("incompatible cyclotomic fields")

    def _widen(self, key):
        if key == self.key:
            return self
        return CycloRational([self.num[0], _ZERO], self.den, M=key, _normalized=True)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        if a.den == b.den:
            return CycloRational([x + y for x, y in zip(a.num, b.num)], a.den, M=a.key)
        return CycloRational(
            [x * b.den + y * a.den for x, y in zip(a.num, b.num)], a.den * b.den, M=a.key
        )

    __radd__ = __add__

    def __neg__(self):
        return CycloRational([-p for p in self.num], self.den, M=self.key, _normalized=True)

    def __sub__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        if a.key == 1:
            num = [a.num[0] * b.num[0]]
        else:
            a0, a1 = a.num
            b0, b1 = b.num
            t = a1 * b1
            num = [a0 * b0 - t, a0 * b1 + a1 * b0 - t]
        return CycloRational(num, a.den * b.den, M=a.key)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.key == 1:
            return CycloRational([self.den], self.num[0], M=1)
        a0, a1 = self.num
        norm = a0 * a0 - a0 * a1 + a1 * a1
        return CycloRational([(a0 - a1) * self.den, -a1 * self.den], norm, M=self.key)

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        a, b = self._coerce(other)
        if a is None:
            return NotImplemented
        return b * a.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        result = CycloRational.const(1, self.key)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # predicates -------------------------------------------------------
    def is_zero(self):
        return all(p == 0 for p in self.num)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            a, b = self._coerce(other)
        except ValueError:
            return False
        if a is None:
            return NotImplemented
        return a.den == b.den and a.num == b.num

    def __hash__(self):
        if self._hash is None:
            num = self.num
            if self.key != 1 and num[1] == 0:
                num = num[:1]
            self._hash = hash((str(self.den), tuple(str(p) for p in num)))
        return self._hash

    def is_laurent(self):
        """True when the denominator is a power of s."""
        return self.den == _S ** self.den.degree()

    def laurent_terms(self):
        """Map s-exponent -> CycloNum for a Laurent polynomial."""
        if not self.is_laurent():
            raise ValueError("not a Laurent polynomial")
        shift = self.den.degree()
        out = {}
        for comp, p in enumerate(self.num):
            for k, c in enumerate(p.coeffs()):
                if c != 0:
                    out.setdefault(k - shift, [Fraction(0)] * len(self.num))[comp] = _to_fraction(c)
        M = 1 if self.key == 1 else 3
        return {e: CycloNum(v, M) for e, v in sorted(out.items())}

    def monomial_exponent(self):
        """Return (c, n) if self == c * s**n with c rational, else None."""
        if self.key != 1 and self.num[1] != 0:
            return None
        p = self.num[0]
        nz = [(k, c) for k, c in enumerate(p.coeffs()) if c != 0]
        if len(nz) != 1 or not self.is_laurent():
            return None
        k, c = nz[0]
        return _to_fraction(c), k - self.den.degree()

    def bar(self):
        """Image under s -> 1/s."""
        dn = max(p.degree() for p in self.num)
        dd = self.den.degree()
        if dn < 0:
            return self
        num = [_Poly(list(reversed(_padded(p, dn + 1)))) for p in self.num]
        den = _Poly(list(reversed(_padded(self.den, dd + 1))))
        if dd >= dn:
            num = [p * _S ** (dd - dn) for p in num]
        else:
            den = den * _S ** (dn - dd)
        return CycloRational(num, den, M=self.key)

    # evaluation / text ------------------------------------------------
    def eval_numeric(self, q0, M=None):
        """Evaluate at q = q0 (mpmath number), s the principal square root."""
        s0 = mpmath.sqrt(mpmath.mpmathify(q0))
        z = 1
        if self.key == 3:
            z = mpmath.expj(2 * mpmath.pi / 3)
        den = _horner(self.den, s0)
        if den == 0:
            raise ValueError("pole at the evaluation point")
        val = sum(_horner(p, s0) * z**k for k, p in enumerate(self.num))
        return val / den

    def render(self):
        if self.key == 1:
            num = _poly_str(self.num[0])
        else:
            parts = []
            for k, p in enumerate(self.num):
                if p == 0:
                    continue
                body = f"({_poly_str(p)})"
                parts.append(body if k == 0 else f"{body}*z")
            num = " + ".join(parts) if parts else "0"
            if len(parts) == 1 and self.num[0] != 0:
                num = parts[0]
        den = _poly_str(self.den)
        if den == "1":
            return f"({num})"
        return f"({num}) / ({den})"

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"CycloRational({self.render()!r}, M={self.key})"


def _padded(p, n):
    cs = list(p.coeffs())
    return cs + [flint.fmpq(0)] * (n - len(cs))


def _horner(p, x):
    acc = mpmath.mpf(0)
    for c in reversed(p.coeffs()):
        acc = acc * x + mpmath.mpf(int(c.p)) / int(c.q)
    return acc


def parse(text, M=1):
    """Parse the rendering grammar (integers, s, q, z, + - * / ^, parentheses)."""
    tree = ast.parse(text.replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return CycloRational.const(node.value, M)
        if isinstance(node, ast.Name):
            if node.id == "s":
                return CycloRational.s_power(1, M)
            if node.id == "q":
                return CycloRational.s_power(2, M)
            if node.id in ("z", "w"):
                return CycloRational.zeta(M)
            raise ValueError(f"unknown symbol {node.id!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = node.right
                sign = 1
                if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                    sign, exp = -1, exp.operand
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                    raise ValueError("exponents must be integer literals")
                return ev(node.left) ** (sign * exp.value)
            a, b = ev(node.left), ev(node.right)
            ops = {ast.Add: a.__add__, ast.Sub: a.__sub__, ast.Mult: a.__mul__, ast.Div: a.__truediv__}
            for k, f in ops.items():
                if isinstance(node.op, k):
                    return f(b)
        raise ValueError(f"unsupported syntax at column {getattr(node, 'col_offset', 0)}")

    return ev(tree)


@lru_cache(maxsize=None)
def qnumber(m, d=1):
    """[m] at base q**d, i.e. (q^{dm} - q^{-dm}) / (q^d - q^{-d}).

    ``d`` is a positive half-integer.  ``m`` may be rational as long as
    ``d*m`` is a half-integer; the result is then a rational function.
    """
    d = Fraction(d)
    m = Fraction(m)
    e, E = 2 * d, 2 * d * m
    if d <= 0 or e.denominator != 1 or E.denominator != 1:
        raise ValueError(f"qnumber needs half-integer exponents, got m={m}, d={d}")
    e, E = int(e), int(E)
    if E == 0:
        return CycloRational.const(0)
    sp = CycloRational.s_power
    return (sp(E) - sp(-E)) / (sp(e) - sp(-e))


@lru_cache(maxsize=None)
def qfactorial(m, d=1):
    if m < 0:
        raise ValueError("qfactorial of a negative integer")
    out = CycloRational.const(1)
    for k in range(1, m + 1):
        out = out * qnumber(k, d)
    return out


def determinant(rows):
    """Determinant of a square matrix of CycloRational by Gaussian elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    det = CycloRational.const(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if not a[r][c].is_zero()), None)
        if piv is None:
            return CycloRational.const(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c]
        inv = a[c][c].inverse()
        for r in range(c + 1, n):
            if a[r][c].is_zero():
                continue
            f = a[r][c] * inv
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


def rref(rows):
    """Reduced row echelon form; returns (matrix, pivot columns)."""
    a = [list(r) for r in rows]
    if not a:
        return a, []
    nr, nc = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if not a[i][c].is_zero()), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(nr):
            if i != r and not a[i][c].is_zero():
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return a, pivots


def nullspace(rows, ncols):
    """Basis of the right kernel of a matrix given as rows."""
    zero, one = CycloRational.const(0), CycloRational.const(1)
    if not rows:
        return [[one if i == j else zero for i in range(ncols)] for j in range(ncols)]
    red, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [zero] * ncols
        v[f] = one
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][f]
        basis.append(v)
    return basis
