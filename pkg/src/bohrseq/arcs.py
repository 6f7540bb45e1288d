"""Exact algebra of closed-arc unions on the circle R/Z.

An arc set is a finite union of closed arcs with rational endpoints,
kept canonical: arcs sorted by left endpoint, pairwise disjoint and
non-touching, and at most the final arc wrapping through 0 (stored with
right endpoint >= 1).  The full circle is the single arc [0, 1].

These sets realize the exact solution regions of norm constraints
||n*beta|| <= c, whose arcs have centers k/n and radius c/n.
"""

from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidInputError
from .torus import DEFAULT_PRECISION_CAP, TorusPoint, parse_fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class Membership(enum.Enum):
    INSIDE = "inside"
    OUTSIDE = "outside"
    UNDECIDED = "undecided"


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True)
class ArcSet:
    """Canonical finite union of closed circle arcs."""

    arcs: tuple[tuple[Fraction, Fraction], ...]

    # -- constructors -------------------------------------------------

    @staticmethod
    def empty() -> "ArcSet":
        return ArcSet(())

    @staticmethod
    def full() -> "ArcSet":
        return ArcSet(((ZERO, ONE),))

    @staticmethod
    def from_raw(raw) -> "ArcSet":
        """Canonicalize arbitrary closed intervals [x, y] (y >= x) taken
        mod 1; intervals of length >= 1 give the full circle."""
        arcs = []
        for x, y in raw:
            if y < x:
                raise InvalidInputError(f"arc with hi < lo: [{x}, {y}]")
            if y - x >= 1:
                return ArcSet.full()
            a = x - _floor(x)
            arcs.append((a, a + (y - x)))
        if not arcs:
            return ArcSet.empty()
        arcs.sort()
        merged = [arcs[0]]
        for a, b in arcs[1:]:
            pa, pb = merged[-1]
            if a <= pb:  # closed arcs touching or overlapping
                if b > pb:
                    merged[-1] = (pa, b)
            else:
                merged.append((a, b))
        # Only the last arc can stick past 1; fold its tail through 0.
        aw, bw = merged[-1]
        if bw >= 1:
            t = bw - 1
            while len(merged) > 1 and merged[0][0] <= t:
                t = max(t, merged[0][1])
                merged.pop(0)
            if t >= aw:
                return ArcSet.full()
            merged[-1] = (aw, 1 + t)
        return ArcSet(tuple(merged))

    # -- basic queries -------------------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.arcs

    @property
    def is_full(self) -> bool:
        return self.arcs == ((ZERO, ONE),)

    def total_length(self) -> Fraction:
        return sum((b - a for a, b in self.arcs), start=ZERO)

    def max_arc_length(self) -> Fraction:
        return max((b - a for a, b in self.arcs), default=ZERO)

    def segments(self) -> list[tuple[Fraction, Fraction]]:
        """Closed line segments inside [0, 1] covering the set (a wrapping
        arc contributes [a, 1] and [0, tail])."""
        out = []
        for a, b in self.arcs:
            if b <= 1:
                out.append((a, b))
            else:
                out.append((ZERO, b - 1))
                out.append((a, ONE))
        out.sort()
        return out

    def contains_fraction(self, x) -> bool:
        x = Fraction(x)
        x = x - _floor(x)
        if not self.arcs:
            return False
        starts = [a for a, _ in self.arcs]
        i = bisect_right(starts, x) - 1
        if i >= 0:
            a, b = self.arcs[i]
            if x <= b:
                return True
        a, b = self.arcs[-1]
        return b >= 1 and x <= b - 1

    def _interval_status(self, lo: Fraction, hi: Fraction):
        """Classify a short line interval [lo, hi] (hi - lo < 1) against the
        set: 'in' if one arc covers it, 'out' if it misses every arc."""
        base = _floor(lo)
        a, b = lo - base, hi - base  # a in [0,1), b < 2
        covered = hit = False
        for s, e in self.arcs:
            for shift in (0, 1):
                ss, ee = s + shift, e + shift
                if ss <= a and b <= ee:
                    covered = True
                if ss <= b and a <= ee:
                    hit = True
        if covered:
            return "in"
        if not hit:
            return "out"
        return "split"

    def member(self, beta: TorusPoint, cap: int = DEFAULT_PRECISION_CAP) -> Membership:
        """Certified membership of a torus point; undecided only when an
        irrational point hugs an arc boundary at the precision cap."""
        if beta.is_rational:
            return Membership.INSIDE if self.contains_fraction(beta.as_fraction()) else Membership.OUTSIDE
        if self.is_full:
            return Membership.INSIDE
        if self.is_empty:
            return Membership.OUTSIDE
        k = 32
        while True:
            lo, hi = beta.enclosure(k)
            status = self._interval_status(lo, hi)
            if status == "in":
                return Membership.INSIDE
            if status == "out":
                return Membership.OUTSIDE
            if k >= cap:
                return Membership.UNDECIDED
            k = min(2 * k, cap)

    # -- set algebra ---------------------------------------------------

    def intersect(self, other: "ArcSet") -> "ArcSet":
        if self.is_full:
            return other
        if other.is_full:
            return self
        xs, ys = self.segments(), other.segments()
        raw = []
        i = j = 0
        while i < len(xs) and j < len(ys):
            a = max(xs[i][0], ys[j][0])
            b = min(xs[i][1], ys[j][1])
            if a <= b:
                raw.append((a, b))
            if xs[i][1] < ys[j][1]:
                i += 1
            else:
                j += 1
        return ArcSet.from_raw(raw)

    def union(self, other: "ArcSet") -> "ArcSet":
        return ArcSet.from_raw(list(self.arcs) + list(other.arcs))

    def contains(self, inner: "ArcSet") -> bool:
        return self.intersect(inner) == inner

    # -- serialization ---------------------------------------------------

    def to_json(self) -> list[dict]:
        return [{"lo": str(a), "hi": str(b)} for a, b in self.arcs]

    @staticmethod
    def from_json(items) -> "ArcSet":
        return ArcSet.from_raw([(parse_fraction(d["lo"]), parse_fraction(d["hi"])) for d in items])


def arcs_for_constraint(n: int, c) -> ArcSet:
    """Exact solution set of ||n*beta|| <= c: n arcs of radius c/n centered
    at the n-division points.  Requires 0 < c < 1/2."""
    c = Fraction(c)
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if not 0 < c < Fraction(1, 2):
        raise InvalidInputError("need 0 < c < 1/2")
    r = c / n
    arcs = [(Fraction(k, n) - r, Fraction(k, n) + r) for k in range(1, n)]
    arcs.append((1 - r, 1 + r))  # the arc around 0, stored as the wrap arc
    return ArcSet(tuple(arcs)) if n > 1 else ArcSet.from_raw(arcs)


def intersect_constraint(region: ArcSet, n: int, c) -> ArcSet:
    """region  intersect  {beta : ||n*beta|| <= c}, generating only the
    constraint arcs that can meet the region (cheap for narrow regions
    even when n is large).

    The pieces come out sorted and pairwise non-touching (parent segments
    are non-touching and constraint arcs are separated by (1-2c)/n), so
    the only canonical fix-up needed is regluing across 0."""
    c = Fraction(c)
    if region.is_full:
        return arcs_for_constraint(n, c)
    cn, cd = c.numerator, c.denominator
    den = n * cd
    out = []
    for lo, hi in region.segments():
        ln, ld = lo.numerator, lo.denominator
        hn, hd = hi.numerator, hi.denominator
        k0 = -((-(ln * n * cd - cn * ld)) // (ld * cd))  # ceil(n*lo - c)
        k1 = (hn * n * cd + cn * hd) // (hd * cd)  # floor(n*hi + c)
        for k in range(k0, k1 + 1):
            a = Fraction(k * cd - cn, den)
            b = Fraction(k * cd + cn, den)
            if a < lo:
                a = lo
            if b > hi:
                b = hi
            if a <= b:
                out.append((a, b))
    if not out:
        return ArcSet.empty()
    if len(out) > 1 and out[0][0] == 0 and out[-1][1] == 1:
        first = out.pop(0)
        out[-1] = (out[-1][0], 1 + first[1])
        if out[-1][1] - out[-1][0] >= 1:
            return ArcSet.full()
    return ArcSet(tuple(out))


def arcs_around(centers, radius) -> ArcSet:
    """Union of closed arcs [center_lo - radius, center_hi + radius] for a
    list of rational center enclosures (lo, hi)."""
    radius = Fraction(radius)
    if radius <= 0:
        raise InvalidInputError("radius must be positive")
    return ArcSet.from_raw([(lo - radius, hi + radius) for lo, hi in centers])


def grid_bitmap(region: ArcSet, grid_q: int) -> bytearray:
    """Membership bitmap of the grid points k/grid_q, k = 0..grid_q-1."""
    if grid_q < 1:
        raise InvalidInputError("grid must have at least one point")
    bits = bytearray(grid_q)
    for a, b in region.arcs:
        for k in range(_ceil(a * grid_q), _floor(b * grid_q) + 1):
            bits[k % grid_q] = 1
    return bits
