"""Exact multivariate polynomial and rational-function arithmetic.

Polynomials are sparse dictionaries mapping exponent tuples to Fraction
coefficients; the zero polynomial is the empty dict.  Rational functions
keep the denominator as a multiset of polynomial factors with integer
exponents, because every division performed by the geometry code divides
by a polynomial that is known explicitly (a frame determinant, a chart
denominator).  Sums and derivatives then only ever need exact trial
division to cancel factors, never a general multivariate gcd.

All coefficients are Fractions, so equality of fields is literal equality
of normal forms: ``is_zero`` is decidable and exact.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

Monomial = Tuple[int, ...]
PolyDict = Dict[Monomial, Fraction]

ZERO = Fraction(0)
ONE = Fraction(1)


def grlex_key(mono: Monomial) -> tuple:
    """Graded lexicographic sort key: total order first, then lex."""
    return (sum(mono), mono)


class Poly:
    """Sparse exact polynomial in ``n`` variables."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs: Mapping[Monomial, Fraction] | None = None):
        self.n = n
        self.coeffs: PolyDict = {}
        if coeffs:
            for mono, c in coeffs.items():
                if c != 0:
                    self.coeffs[tuple(mono)] = Fraction(c)

    @staticmethod
    def zero(n: int) -> Poly:
        return Poly(n)

    @staticmethod
    def const(n: int, value) -> Poly:
        c = Fraction(value)
        return Poly(n, {(0,) * n: c} if c else None)

    @staticmethod
    def var(n: int, idx: int) -> Poly:
        if not 0 <= idx < n:
            raise ValueError(f"variable index {idx} out of range for n={n}")
        mono = [0] * n
        mono[idx] = 1
        return Poly(n, {tuple(mono): ONE})

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_const(self) -> bool:
        return all(sum(m) == 0 for m in self.coeffs)

    def const_value(self) -> Fraction:
        return self.coeffs.get((0,) * self.n, ZERO)

    def degree(self) -> int:
        return max((sum(m) for m in self.coeffs), default=0)

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.n, frozenset(self.coeffs.items())))

    def __add__(self, other: Poly) -> Poly:
        out = dict(self.coeffs)
        for mono, c in other.coeffs.items():
            s = out.get(mono, ZERO) + c
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        res = Poly(self.n)
        res.coeffs = out
        return res

    def __neg__(self) -> Poly:
        res = Poly(self.n)
        res.coeffs = {m: -c for m, c in self.coeffs.items()}
        return res

    def __sub__(self, other: Poly) -> Poly:
        return self + (-other)

    def __mul__(self, other: Poly) -> Poly:
        out: PolyDict = {}
        for ma, ca in self.coeffs.items():
            for mb, cb in other.coeffs.items():
                mono = tuple(x + y for x, y in zip(ma, mb))
                s = out.get(mono, ZERO) + ca * cb
                if s:
                    out[mono] = s
                else:
                    out.pop(mono, None)
        res = Poly(self.n)
        res.coeffs = out
        return res

    def scale(self, value) -> Poly:
        c = Fraction(value)
        if not c:
            return Poly(self.n)
        res = Poly(self.n)
        res.coeffs = {m: c * v for m, v in self.coeffs.items()}
        return res

    def diff(self, idx: int) -> Poly:
        out: PolyDict = {}
        for mono, c in self.coeffs.items():
            e = mono[idx]
            if e == 0:
                continue
            m = list(mono)
            m[idx] = e - 1
            out[tuple(m)] = c * e
        res = Poly(self.n)
        res.coeffs = out
        return res

    def eval(self, point: Iterable) -> Fraction:
        pt = [Fraction(x) for x in point]
        total = ZERO
        for mono, c in self.coeffs.items():
            term = c
            for x, e in zip(pt, mono):
                if e:
                    term *= x ** e
            total += term
        return total

    def eval_float(self, point) -> float:
        total = 0.0
        for mono, c in self.coeffs.items():
            term = float(c)
            for x, e in zip(point, mono):
                if e:
                    term *= x ** e
            total += term
        return total

    def leading(self) -> tuple[Monomial, Fraction]:
        mono = max(self.coeffs, key=grlex_key)
        return mono, self.coeffs[mono]

    def divides(self, other: Poly) -> Poly | None:
        """Exact division other / self; None if self does not divide other."""
        if self.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        if other.is_zero():
            return Poly(self.n)
        if self.is_const():
            return other.scale(1 / self.const_value())
        lead_m, lead_c = self.leading()
        rem = other
        quot: PolyDict = {}
        while not rem.is_zero():
            rm, rc = rem.leading()
            qm = tuple(a - b for a, b in zip(rm, lead_m))
            if any(e < 0 for e in qm):
                return None
            qc = rc / lead_c
            quot[qm] = qc
            rem = rem - self * Poly(self.n, {qm: qc})
        res = Poly(self.n)
        res.coeffs = quot
        return res

    def monic(self) -> tuple[Poly, Fraction]:
        """Scale so the grlex-leading coefficient is 1; returns (monic, factor)."""
        if self.is_zero():
            return self, ONE
        _, lc = self.leading()
        return self.scale(1 / lc), lc

    def __repr__(self):
        if self.is_zero():
            return "Poly(0)"
        terms = []
        for mono in sorted(self.coeffs, key=grlex_key):
            c = self.coeffs[mono]
            vars_part = "*".join(
                f"x{i + 1}" + (f"^{e}" if e > 1 else "")
                for i, e in enumerate(mono) if e
            )
            terms.append(f"{c}" + (f"*{vars_part}" if vars_part else ""))
        return "Poly(" + " + ".join(terms) + ")"


class RationalFunc:
    """Quotient num / prod(factor^exp) of exact polynomials.

    The denominator is stored factored; factors are monic in the grlex
    leading coefficient and the scalar is folded into the numerator.
    """

    __slots__ = ("n", "num", "den")

    def __init__(self, num: Poly, den: Mapping[Poly, int] | None = None):
        self.n = num.n
        self.num = num
        self.den: Dict[Poly, int] = {}
        if den and not num.is_zero():
            for f, e in den.items():
                if e:
                    self.den[f] = self.den.get(f, 0) + e
        self._reduce()

    @staticmethod
    def from_poly(p: Poly) -> RationalFunc:
        return RationalFunc(p)

    @staticmethod
    def const(n: int, value) -> RationalFunc:
        return RationalFunc(Poly.const(n, value))

    @staticmethod
    def var(n: int, idx: int) -> RationalFunc:
        return RationalFunc(Poly.var(n, idx))

    def _reduce(self) -> None:
        if self.num.is_zero():
            self.den = {}
            return
        reduced: Dict[Poly, int] = {}
        for f, e in self.den.items():
            while e > 0:
                q = f.divides(self.num)
                if q is None:
                    break
                self.num = q
                e -= 1
            if e:
                reduced[f] = e
        self.den = reduced

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunc):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):  # pragma: no cover - not used as dict key
        return hash(self.n)

    def _den_poly(self) -> Poly:
        d = Poly.const(self.n, 1)
        for f, e in self.den.items():
            for _ in range(e):
                d = d * f
        return d

    def __add__(self, other: RationalFunc) -> RationalFunc:
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        # common denominator: factorwise max exponent
        common: Dict[Poly, int] = dict(self.den)
        for f, e in other.den.items():
            common[f] = max(common.get(f, 0), e)
        na = self.num
        for f, e in common.items():
            for _ in range(e - self.den.get(f, 0)):
                na = na * f
        nb = other.num
        for f, e in common.items():
            for _ in range(e - other.den.get(f, 0)):
                nb = nb * f
        return RationalFunc(na + nb, common)

    def __neg__(self) -> RationalFunc:
        res = RationalFunc.__new__(RationalFunc)
        res.n = self.n
        res.num = -self.num
        res.den = dict(self.den)
        return res

    def __sub__(self, other: RationalFunc) -> RationalFunc:
        return self + (-other)

    def __mul__(self, other: RationalFunc) -> RationalFunc:
        if self.is_zero() or other.is_zero():
            return RationalFunc(Poly.zero(self.n))
        den: Dict[Poly, int] = dict(self.den)
        for f, e in other.den.items():
            den[f] = den.get(f, 0) + e
        return RationalFunc(self.num * other.num, den)

    def scale(self, value) -> RationalFunc:
        return RationalFunc(self.num.scale(value), self.den)

    def inverse(self) -> RationalFunc:
        """Reciprocal; the (monic) numerator becomes a new denominator atom."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero field")
        num = self._den_poly()
        monic, lc = self.num.monic()
        if monic.is_const():
            return RationalFunc(num.scale(1 / lc))
        return RationalFunc(num.scale(1 / lc), {monic: 1})

    def __truediv__(self, other: RationalFunc) -> RationalFunc:
        return self * other.inverse()

    def diff(self, idx: int) -> RationalFunc:
        """Partial derivative via the quotient rule, factor by factor."""
        # d(N / prod f^e) = dN / prod f^e - sum_i e_i dfi N / (f_i * prod f^e)
        terms = RationalFunc(self.num.diff(idx), self.den)
        for f, e in self.den.items():
            df = f.diff(idx)
            if df.is_zero():
                continue
            den = dict(self.den)
            den[f] = e + 1
            terms = terms + RationalFunc((self.num * df).scale(-e), den)
        return terms

    def eval(self, point) -> Fraction:
        v = self.num.eval(point)
        for f, e in self.den.items():
            d = f.eval(point)
            if d == 0:
                raise ZeroDivisionError(f"denominator vanishes at {tuple(point)}")
            v /= d ** e
        return v

    def eval_float(self, point) -> float:
        v = self.num.eval_float(point)
        for f, e in self.den.items():
            v /= f.eval_float(point) ** e
        return v

    def __repr__(self):
        if not self.den:
            return f"RationalFunc({self.num!r})"
        return f"RationalFunc({self.num!r} / {self.den!r})"


def rf_matrix_inverse(m: list[list[RationalFunc]]) -> list[list[RationalFunc]]:
    """Exact matrix inverse via Gauss-Jordan elimination over the field."""
    size = len(m)
    n = m[0][0].n
    aug = [[m[i][j] for j in range(size)] +
           [RationalFunc.const(n, 1 if i == j else 0) for j in range(size)]
           for i in range(size)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if not aug[r][col].is_zero()), None)
        if pivot is None:
            raise ZeroDivisionError("singular matrix over the function field")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = aug[col][col].inverse()
        aug[col] = [x * inv for x in aug[col]]
        for r in range(size):
            if r != col and not aug[r][col].is_zero():
                factor = aug[r][col]
                aug[r] = [a - factor * b for a, b in zip(aug[r], aug[col])]
    return [row[size:] for row in aug]
