"""Points on the circle R/Z and the distance-to-nearest-integer norm.

A point is stored as an exact value in a real quadratic extension of Q,
canonically reduced into [0, 1).  Three constructors are supported:
rationals, quadratic surds p + q*sqrt(d), and eventually periodic
continued fractions (which are converted to their exact surd value).
Norm computations return certified enclosures; rational inputs always
produce exact, zero-width intervals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidInputError, PrecisionCapError
from .quadext import QuadExt, squarefree_split

HALF = Fraction(1, 2)

#: Default ceiling for precision-doubling loops (bits of enclosure width).
DEFAULT_PRECISION_CAP = 4096


def parse_fraction(x) -> Fraction:
    """Accepts Fraction, int, or a 'p/q' string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInputError(f"cannot parse rational {x!r}: {exc}") from exc
    raise InvalidInputError(f"cannot interpret {x!r} as a rational")


@dataclass(frozen=True)
class TorusPoint:
    """An element of R/Z with an exact value in [0, 1)."""

    kind: str
    value: QuadExt

    @property
    def is_rational(self) -> bool:
        return self.value.is_rational

    def as_fraction(self) -> Fraction:
        return self.value.as_fraction()

    def approximant(self, k: int) -> Fraction:
        """A rational a_k with |x - a_k| <= 2**-k."""
        lo, hi = self.value.enclosure(k + 1)
        return (lo + hi) / 2

    def enclosure(self, k: int) -> tuple[Fraction, Fraction]:
        return self.value.enclosure(k)

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return f"TorusPoint({self.value!r})"


def _point(value: QuadExt, kind: str) -> TorusPoint:
    return TorusPoint(kind, value.mod1())


def rational_point(num, den=1) -> TorusPoint:
    if den == 0:
        raise InvalidInputError("zero denominator")
    return _point(QuadExt.from_rational(Fraction(num, den)), "rational")


def sqrt_point(radicand: int, p=0, q=1) -> TorusPoint:
    """The point p + q*sqrt(radicand) mod 1."""
    if radicand <= 0:
        raise InvalidInputError(f"radicand must be positive, got {radicand}")
    s, d0 = squarefree_split(radicand)
    if d0 == 1:
        raise InvalidInputError(f"radicand {radicand} is a perfect square")
    value = QuadExt.from_surd(parse_fraction(p), parse_fraction(q), radicand)
    kind = "rational" if value.is_rational else "sqrt"
    return _point(value, kind)


def _fold_finite_cfrac(quotients) -> Fraction:
    val = Fraction(quotients[-1])
    for a in reversed(quotients[:-1]):
        val = a + 1 / val
    return val


def cfrac_point(head, period=()) -> TorusPoint:
    """Point given by a continued fraction [a0; a1, ...] with an optional
    purely periodic tail; the tail makes the value a quadratic surd."""
    head = [int(a) for a in head]
    period = [int(b) for b in period]
    if not head:
        raise InvalidInputError("empty cfrac")
    if any(a < 1 for a in head[1:]) or any(b < 1 for b in period):
        raise InvalidInputError("partial quotients after the first must be >= 1")
    if not period:
        return _point(QuadExt.from_rational(_fold_finite_cfrac(head)), "cfrac")

    # Tail y = [c0; c1, ..., c_{m-1}, c0, ...] is the positive fixed point of
    # the Moebius map with matrix M(c0)...M(c_{m-1}), M(a) = [[a, 1], [1, 0]].
    mp, mq, mr, ms = 1, 0, 0, 1
    for a in period:
        mp, mq, mr, ms = mp * a + mq, mp, mr * a + ms, mr
    disc = (ms - mp) ** 2 + 4 * mr * mq
    s, d0 = squarefree_split(disc)
    if d0 == 1:
        raise InvalidInputError("cfrac period does not describe an irrational value")
    ya = Fraction(mp - ms, 2 * mr)
    yb = Fraction(s, 2 * mr)  # y = ya + yb*sqrt(d0), the root with y > 1

    # Fold the head on top of y and rationalize the denominator.
    ha, hb, hc, hd = 1, 0, 0, 1
    for a in head:
        ha, hb, hc, hd = ha * a + hb, ha, hc * a + hd, hc
    na, nb = ha * ya + hb, ha * yb
    da, db = hc * ya + hd, hc * yb
    nrm = da * da - db * db * d0
    xa = (na * da - nb * db * d0) / nrm
    xb = (nb * da - na * db) / nrm
    return _point(QuadExt.from_surd(xa, xb, d0), "cfrac")


def point_from_value(value: QuadExt) -> TorusPoint:
    """Internal constructor for exact combination values."""
    if value.is_rational:
        kind = "rational"
    elif len(value.terms) == 1:
        kind = "sqrt"
    else:
        kind = "combination"
    return _point(value, kind)


def make_point(spec) -> TorusPoint:
    """Build a point from a descriptor (dict, Fraction, int or 'p/q')."""
    if isinstance(spec, TorusPoint):
        return spec
    if isinstance(spec, (int, Fraction, str)):
        f = parse_fraction(spec)
        return rational_point(f.numerator, f.denominator)
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidInputError(f"not a point descriptor: {spec!r}")
    kind = spec["kind"]
    if kind == "rational":
        return rational_point(int(spec["num"]), int(spec["den"]))
    if kind == "sqrt":
        return sqrt_point(int(spec["radicand"]), spec.get("p", 0), spec.get("q", 1))
    if kind == "cfrac":
        return cfrac_point(spec.get("head", []), spec.get("period", []))
    raise InvalidInputError(f"unknown point kind {kind!r}")


def point_to_json(point: TorusPoint) -> dict:
    if point.is_rational:
        f = point.as_fraction()
        return {"kind": "rational", "num": f.numerator, "den": f.denominator}
    rat, coeff, d = point.value.single_radical()
    return {"kind": "sqrt", "radicand": d, "p": str(rat), "q": str(coeff)}


def point_combination(points, coeffs) -> TorusPoint:
    """Sum of k_i * alpha_i reduced mod 1, computed exactly."""
    acc = QuadExt.from_rational(0)
    for p, k in zip(points, coeffs):
        acc = acc + p.value.scale(k)
    return point_from_value(acc)


def points_equal(x: TorusPoint, y: TorusPoint) -> bool:
    """Exact equality; decidable for every supported point kind."""
    return x.value == y.value


@dataclass(frozen=True)
class NormInterval:
    """Certified enclosure [lo, hi] of a value ||x|| in [0, 1/2]."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi <= HALF):
            raise InvalidInputError(f"bad norm interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def intersect_upper(self, bound: Fraction) -> "NormInterval":
        return NormInterval(self.lo, min(self.hi, bound))


class Cmp(enum.Enum):
    AT_MOST = "at-most"
    GREATER = "greater"
    UNDECIDED = "undecided"


def norm_of_fraction(x: Fraction) -> Fraction:
    """Exact distance from a rational to the nearest integer."""
    r = x - (x.numerator // x.denominator)
    return min(r, 1 - r)


def _tent(x: Fraction) -> Fraction:
    # distance to the nearest of {0, 1, 2} for x in [0, 2)
    return min(x, abs(1 - x), 2 - x)


def norm_interval_of(value: QuadExt, k: int = 48) -> NormInterval:
    """Certified enclosure of ||value||; exact when the value is rational."""
    if value.is_rational:
        n = norm_of_fraction(value.as_fraction())
        return NormInterval(n, n)
    lo, hi = value.enclosure(k)
    base = lo.numerator // lo.denominator
    a, b = lo - base, hi - base  # a in [0,1), b < a + width
    if b - a >= 1:
        return NormInterval(Fraction(0), HALF)
    vmin = Fraction(0) if (a == 0 or a <= 1 <= b) else min(_tent(a), _tent(b))
    vmax = HALF if (a <= HALF <= b or a <= Fraction(3, 2) <= b) else max(_tent(a), _tent(b))
    return NormInterval(min(vmin, HALF), min(vmax, HALF))


def scaled_norm(n: int, beta: TorusPoint, k: int = 48) -> NormInterval:
    """Enclosure of ||n * beta||; exact for rational beta, width at most
    n * 2**(1-k) otherwise."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if beta.is_rational:
        f = beta.as_fraction()
        q = f.denominator
        r = (n * f.numerator) % q
        v = Fraction(min(r, q - r), q)
        return NormInterval(v, v)
    return norm_interval_of(beta.value.scale(n), k)


def cmp_threshold(v: NormInterval, c: Fraction) -> Cmp:
    """Compare a certified enclosure against a rational threshold."""
    if c < 0:
        raise InvalidInputError("threshold must be >= 0")
    if v.hi <= c:
        return Cmp.AT_MOST
    if v.lo > c:
        return Cmp.GREATER
    return Cmp.UNDECIDED


def value_norm_le(value: QuadExt, c: Fraction, cap: int = DEFAULT_PRECISION_CAP) -> bool:
    """Certified decision of ||value|| <= c, refining precision as needed."""
    if value.is_rational:
        return norm_of_fraction(value.as_fraction()) <= c
    k = 32
    while True:
        r = cmp_threshold(norm_interval_of(value, k), c)
        if r is Cmp.AT_MOST:
            return True
        if r is Cmp.GREATER:
            return False
        if k >= cap:
            raise PrecisionCapError(f"||value|| vs {c} undecided at cap {cap}", cap=cap)
        k = min(2 * k, cap)


def norm_le(n: int, beta: TorusPoint, c: Fraction, cap: int = DEFAULT_PRECISION_CAP) -> bool:
    """Certified decision of ||n*beta|| <= c."""
    if beta.is_rational:
        return scaled_norm(n, beta).hi <= c
    return value_norm_le(beta.value.scale(n), c, cap)


def norm_upper_bound(value: QuadExt, rel_bits: int = 24, cap: int = DEFAULT_PRECISION_CAP) -> Fraction:
    """Deterministic rational upper bound on ||value||, tight to a relative
    2**-rel_bits (used where certificates store a single rational)."""
    if value.is_rational:
        return norm_of_fraction(value.as_fraction())
    k = 64
    while True:
        v = norm_interval_of(value, k)
        if v.hi == 0 or v.width <= v.hi / (1 << rel_bits):
            return v.hi
        if k >= cap:
            return v.hi
        k = min(2 * k, cap)


def norm_lower_bound(value: QuadExt, rel_bits: int = 24, cap: int = DEFAULT_PRECISION_CAP) -> Fraction:
    """Deterministic rational lower bound on ||value||."""
    if value.is_rational:
        return norm_of_fraction(value.as_fraction())
    k = 64
    while True:
        v = norm_interval_of(value, k)
        if v.lo > 0 and v.width <= v.lo / (1 << rel_bits):
            return v.lo
        if k >= cap:
            return v.lo
        k = min(2 * k, cap)


def norm_bound_from_multiples(alpha: TorusPoint, n: int, d: Fraction,
                              cap: int = DEFAULT_PRECISION_CAP) -> NormInterval | None:
    """If ||k*alpha|| <= d for all k = 1..n (certified), the norm of alpha
    is at most d/n; returns the improved enclosure, or None when the
    hypothesis fails.  Requires d < 1/3."""
    d = Fraction(d)
    if not 0 < d < Fraction(1, 3):
        raise InvalidInputError("need 0 < d < 1/3")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    for k in range(1, n + 1):
        if not norm_le(k, alpha, d, cap):
            return None
    return scaled_norm(1, alpha, 64).intersect_upper(d / n)


def norm_bound_from_doublings(alpha: TorusPoint, beta: TorusPoint, n: int, d: Fraction,
                              cap: int = DEFAULT_PRECISION_CAP) -> NormInterval | None:
    """If ||beta + 2**l * alpha|| <= d for l = 0..n (certified), the norm of
    alpha is at most d / 2**(n-2); returns the improved enclosure, or None.
    Requires d < 1/6."""
    d = Fraction(d)
    if not 0 < d < Fraction(1, 6):
        raise InvalidInputError("need 0 < d < 1/6")
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    for l in range(n + 1):
        w = beta.value + alpha.value.scale(1 << l)
        if not value_norm_le(w, d, cap):
            return None
    bound = d * Fraction(4, 1 << n)  # d / 2**(n-2), valid for small n too
    return norm_interval_of(alpha.value, 64).intersect_upper(min(bound, HALF))
