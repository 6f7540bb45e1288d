"""Exact arithmetic in real quadratic extensions of Q.

Values have the shape  r + c_1*sqrt(d_1) + ... + c_m*sqrt(d_m)  with
rational r, c_i and distinct squarefree integers d_i >= 2.  Square roots of
distinct squarefree integers are linearly independent over Q, so equality
and sign are decided exactly, while rational enclosures of any requested
width come from integer square roots.  Only the linear operations needed by
the rest of the package are provided (sum, negation, scaling by rationals);
products of two irrational values never arise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from .errors import InvalidInputError, PrecisionCapError

# Absolute ceiling on enclosure precision (bits).  sign()/floor() terminate
# long before this for any value built from the public constructors.
_HARD_PRECISION_CAP = 1 << 22


def squarefree_split(d: int) -> tuple[int, int]:
    """Write d = s*s*d0 with d0 squarefree; returns (s, d0)."""
    if d <= 0:
        raise InvalidInputError(f"radicand must be positive, got {d}")
    s, d0, p = 1, 1, 2
    n = d
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            s *= p ** (e // 2)
            if e % 2:
                d0 *= p
        p += 1 if p == 2 else 2
    d0 *= n
    return s, d0


def sqrt_enclosure(d: int, k: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of sqrt(d) with width at most 2**-k."""
    r = isqrt(d << (2 * k))
    scale = 1 << k
    lo = Fraction(r, scale)
    hi = lo if r * r == d << (2 * k) else Fraction(r + 1, scale)
    return lo, hi


@dataclass(frozen=True)
class QuadExt:
    """An exact element r + sum c_i*sqrt(d_i), d_i squarefree and distinct."""

    rat: Fraction
    terms: tuple[tuple[int, Fraction], ...] = ()

    @staticmethod
    def from_rational(x) -> "QuadExt":
        return QuadExt(Fraction(x))

    @staticmethod
    def from_surd(p, q, d: int) -> "QuadExt":
        """The value p + q*sqrt(d); d is normalized to squarefree form."""
        p, q = Fraction(p), Fraction(q)
        s, d0 = squarefree_split(d)
        if d0 == 1:
            return QuadExt(p + q * s)
        q = q * s
        if q == 0:
            return QuadExt(p)
        return QuadExt(p, ((d0, q),))

    @property
    def is_rational(self) -> bool:
        return not self.terms

    def as_fraction(self) -> Fraction:
        if self.terms:
            raise InvalidInputError("value is irrational")
        return self.rat

    def __add__(self, other: "QuadExt") -> "QuadExt":
        coeffs = dict(self.terms)
        for d, c in other.terms:
            c2 = coeffs.get(d, Fraction(0)) + c
            if c2:
                coeffs[d] = c2
            else:
                coeffs.pop(d, None)
        return QuadExt(self.rat + other.rat, tuple(sorted(coeffs.items())))

    def __neg__(self) -> "QuadExt":
        return QuadExt(-self.rat, tuple((d, -c) for d, c in self.terms))

    def __sub__(self, other: "QuadExt") -> "QuadExt":
        return self + (-other)

    def scale(self, f) -> "QuadExt":
        """Multiply by a rational scalar."""
        f = Fraction(f)
        if f == 0:
            return QuadExt(Fraction(0))
        return QuadExt(self.rat * f, tuple((d, c * f) for d, c in self.terms))

    def shift(self, f) -> "QuadExt":
        """Add a rational scalar."""
        return QuadExt(self.rat + Fraction(f), self.terms)

    def enclosure(self, k: int) -> tuple[Fraction, Fraction]:
        """Rational [lo, hi] containing the value, hi - lo <= 2**-k."""
        lo = hi = self.rat
        if not self.terms:
            return lo, hi
        # Split the width budget evenly across the irrational terms.
        extra = (len(self.terms) - 1).bit_length()
        for d, c in self.terms:
            kk = k + extra + max(0, (abs(c.numerator) // abs(c.denominator) + 1).bit_length())
            slo, shi = sqrt_enclosure(d, kk)
            if c > 0:
                lo, hi = lo + c * slo, hi + c * shi
            else:
                lo, hi = lo + c * shi, hi + c * slo
        return lo, hi

    def sign(self) -> int:
        """Exact sign (-1, 0, +1); decidable because nonzero values with
        irrational part are bounded away from zero."""
        if not self.terms:
            return (self.rat > 0) - (self.rat < 0)
        k = 32
        while k <= _HARD_PRECISION_CAP:
            lo, hi = self.enclosure(k)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            k *= 2
        raise PrecisionCapError("sign undecided at hard precision cap", cap=_HARD_PRECISION_CAP)

    def compare(self, other: "QuadExt") -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def floor(self) -> int:
        if not self.terms:
            return self.rat.numerator // self.rat.denominator
        k = 32
        while k <= _HARD_PRECISION_CAP:
            lo, hi = self.enclosure(k)
            flo = lo.numerator // lo.denominator
            fhi = hi.numerator // hi.denominator
            if flo == fhi:
                return flo
            k *= 2
        raise PrecisionCapError("floor undecided at hard precision cap", cap=_HARD_PRECISION_CAP)

    def mod1(self) -> "QuadExt":
        return self.shift(-self.floor())

    def single_radical(self) -> tuple[Fraction, Fraction, int | None]:
        """View as p + q*sqrt(d); raises if more than one radical is present."""
        if not self.terms:
            return self.rat, Fraction(0), None
        if len(self.terms) > 1:
            raise InvalidInputError("value involves several radicals")
        d, c = self.terms[0]
        return self.rat, c, d

    def __float__(self):
        lo, hi = self.enclosure(64)
        return float((lo + hi) / 2)

    def __repr__(self):
        parts = [str(self.rat)] if self.rat or not self.terms else []
        parts += [f"{c}*sqrt({d})" for d, c in self.terms]
        return " + ".join(parts)
