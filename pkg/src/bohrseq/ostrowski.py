"""Continued-fraction scale ladders for a single circle point.

For one generator alpha (rational or quadratic surd) the convergent
denominators q_0 < q_1 < ... form a ladder of scales: every positive
integer n has a greedy expansion n = sum c_i * q_i with digits bounded by
the partial quotients, and n*alpha lands within sum c_i * theta_i of an
integer, where theta_i = q_i*alpha - p_i are the (alternating, shrinking)
convergent errors.  This module exposes

  * exact ladder levels (q_i, p_i, theta_i with certified bounds),
  * greedy digit extraction,
  * the best-approximation minimum  min_{1<=j<=J} ||j*alpha||,
  * complete branch-and-bound enumeration of  {n in (lo, hi] : ||n*alpha|| <= eps}
    without scanning, sound for arbitrarily large hi.

Internally alpha is mirrored to min(alpha, 1-alpha); the norm ||n*alpha||
is invariant under this reflection and it keeps the first partial quotient
at least 2, which the greedy digit bound requires.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceededError, InvalidInputError
from .quadext import QuadExt
from .torus import TorusPoint, norm_le, point_from_value

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Level:
    """One ladder scale: convergent denominator q with error theta."""

    index: int
    q: int
    p: int
    cap: int | None  # next partial quotient; None on the final rational level
    theta: QuadExt  # exact q*alpha - p
    theta_lo: Fraction  # certified signed bounds on theta
    theta_hi: Fraction

    @property
    def abs_hi(self) -> Fraction:
        return max(abs(self.theta_lo), abs(self.theta_hi))

    @property
    def abs_lo(self) -> Fraction:
        if self.theta_lo <= 0 <= self.theta_hi:
            return Fraction(0)
        return min(abs(self.theta_lo), abs(self.theta_hi))


_LADDER_CACHE: dict = {}


def ladder_for(alpha: TorusPoint) -> "Ladder":
    """Shared ladder instance per point value (levels extend lazily)."""
    lad = _LADDER_CACHE.get(alpha.value)
    if lad is None:
        lad = _LADDER_CACHE[alpha.value] = Ladder(alpha)
    return lad


def _cf_terms_rational(x: Fraction):
    num, den = x.numerator, x.denominator
    while den:
        a, r = divmod(num, den)
        yield a
        num, den = den, r


def _cf_terms_surd(u: Fraction, v: Fraction, d: int):
    # Plain floor/invert loop; the state (u, v) cycles for quadratic surds,
    # so coefficient sizes stay bounded.
    while True:
        val = QuadExt.from_surd(u, v, d)
        a = val.floor()
        yield a
        u = u - a
        nrm = u * u - v * v * d
        u, v = u / nrm, -v / nrm


class Ladder:
    """Lazy convergent ladder of a rational or single-radical torus point."""

    def __init__(self, alpha: TorusPoint):
        rat, coef, d = alpha.value.single_radical()
        self.alpha = alpha
        # Mirror into [0, 1/2]; the norm is reflection-invariant.
        value = alpha.value
        if value.compare(QuadExt.from_rational(HALF)) > 0:
            value = QuadExt.from_rational(1) - value
        self.mirrored = value
        self.point = point_from_value(value)
        if value.is_rational:
            self._terms = _cf_terms_rational(value.as_fraction())
        else:
            u, c, dd = value.single_radical()
            self._terms = _cf_terms_surd(u, c, dd)
        self._pending = next(self._terms)  # a_0 = 0
        self._levels: list[Level] = []
        self._pp, self._qq = 1, 0  # previous convergent (p_{-1}, q_{-1})
        self._finished = False

    def _theta_bounds(self, theta: QuadExt) -> tuple[Fraction, Fraction]:
        if theta.is_rational:
            f = theta.as_fraction()
            return f, f
        k = 64
        while True:
            lo, hi = theta.enclosure(k)
            if lo > 0 or hi < 0:
                width_ok = (hi - lo) <= max(abs(lo), abs(hi)) / (1 << 30)
                if width_ok:
                    return lo, hi
            k *= 2

    def _extend(self) -> bool:
        """Append one more level; False when the (rational) ladder is done."""
        if self._finished:
            return False
        try:
            a_next = next(self._terms)
        except StopIteration:
            a_next = None
            self._finished = True
        if not self._levels:
            p, q = self._pending, 1  # convergent p_0/q_0 = a_0/1
        else:
            last = self._levels[-1]
            p = self._pending * last.p + self._pp
            q = self._pending * last.q + self._qq
            self._pp, self._qq = last.p, last.q
        theta = self.mirrored.scale(q).shift(-p)
        lo, hi = self._theta_bounds(theta)
        self._levels.append(Level(len(self._levels), q, p, a_next, theta, lo, hi))
        if a_next is None:
            return False
        self._pending = a_next
        return True

    def levels_up_to(self, limit: int) -> list[Level]:
        """All ladder levels with q <= limit (at least the first one)."""
        if limit < 1:
            raise InvalidInputError("limit must be >= 1")
        if not self._levels:
            self._extend()
        while (not self._finished and self._levels[-1].cap is not None):
            nxt_q = self._levels[-1].cap * self._levels[-1].q + (self._levels[-2].q if len(self._levels) > 1 else 0)
            if nxt_q > limit:
                break
            if not self._extend():
                break
        return [lv for lv in self._levels if lv.q <= limit]

    def min_norm_up_to(self, J: int) -> tuple[Fraction, Fraction]:
        """Certified bounds on min_{1<=j<=J} ||j*alpha||; by the classical
        best-approximation theorem the minimum is |theta| of the largest
        convergent denominator <= J."""
        if J < 1:
            raise InvalidInputError("J must be >= 1")
        levels = self.levels_up_to(J)
        best = levels[-1]
        if best.theta.is_rational and best.theta.as_fraction() == 0:
            return Fraction(0), Fraction(0)
        return best.abs_lo, best.abs_hi

    def greedy_digits(self, n: int, levels: list[Level]) -> list[int]:
        """Greedy expansion digits of n over the given levels (descending
        remainder division); digit list is aligned with `levels`."""
        digits = [0] * len(levels)
        rem = n
        for i in range(len(levels) - 1, -1, -1):
            digits[i], rem = divmod(rem, levels[i].q)
        if rem:
            raise InvalidInputError("levels do not reach scale 1")
        return digits

    def enumerate_members(self, eps: Fraction, lo: int, hi: int,
                          node_budget: int = 50_000_000) -> list[int]:
        """All n in (lo, hi] with ||n*alpha|| <= eps, by branch and bound
        over greedy digits.  Complete: every n has a greedy digit vector
        inside the searched box; pruning is by certified reachability of an
        integer in the scaled error window; every emitted member passes an
        exact final norm check.

        Levels are processed coarse to fine (small q first): once the
        large error terms are fixed, the swing the fine levels can still
        add is tiny, so branches whose partial sum is not already near an
        integer die immediately."""
        eps = Fraction(eps)
        if eps <= 0 or hi < 1:
            return []
        lo = max(lo, 0)
        levels = self.levels_up_to(hi)
        L = len(levels)
        # Scaled integer bounds: resolution well below both eps and theta.
        prec = 70 + max(0, eps.denominator.bit_length() - eps.numerator.bit_length())
        scale = 1 << prec
        t_lo, t_hi, caps, qs, strict = [], [], [], [], []
        for i, lv in enumerate(levels):
            cap = hi // lv.q if (lv.cap is None or i == L - 1) else lv.cap
            if i == L - 1 and lv.cap is not None:
                cap = min(cap, lv.cap)  # a greedy top digit never exceeds a_{L+1}
            caps.append(cap)
            # the digit value whose use forces a zero digit one level down
            # (canonical-expansion uniqueness); None when unconstrained
            strict.append(lv.cap if (lv.cap is not None and i > 0) else None)
            qs.append(lv.q)
            t_lo.append((lv.theta_lo.numerator * scale) // lv.theta_lo.denominator)
            t_hi.append(-((-lv.theta_hi.numerator * scale) // lv.theta_hi.denominator))
        if L > 1 and levels[0].cap is not None:
            caps[0] = min(caps[0], levels[0].cap - 1)  # c_0 < a_1 canonically
        # Suffix swings: reachable signed error and maximal n of levels >= i.
        w_neg = [0] * (L + 1)
        w_pos = [0] * (L + 1)
        n_rest = [0] * (L + 1)
        for i in range(L - 1, -1, -1):
            w_neg[i] = w_neg[i + 1] + caps[i] * min(0, t_lo[i])
            w_pos[i] = w_pos[i + 1] + caps[i] * max(0, t_hi[i])
            n_rest[i] = n_rest[i + 1] + caps[i] * qs[i]
        slack = sum(caps) + 1  # absorbs per-digit scaled-rounding error
        e_num, e_den = eps.numerator, eps.denominator
        e_scaled = -((-e_num * scale) // e_den) + slack

        members = []
        budget = node_budget
        # DFS over levels 0..L-1; state = (level, n_part, s_lo, s_hi, prev_zero).
        stack = [(0, 0, 0, 0, True)]
        while stack:
            budget -= 1
            if budget < 0:
                raise BudgetExceededError(
                    "member enumeration node budget exhausted",
                    lo=lo, hi=hi, eps=str(eps))
            i, n_part, s_lo, s_hi, prev_zero = stack.pop()
            if i == L:
                if lo < n_part <= hi and n_part >= 1:
                    # certified bracket decision (distance of the scaled error
                    # window to the nearest multiple); exact check only when
                    # the window straddles the eps boundary
                    base = (s_lo // scale) * scale
                    a, b = s_lo - base, s_hi - base
                    tent_a = min(a, abs(scale - a), 2 * scale - a)
                    tent_b = min(b, abs(scale - b), 2 * scale - b)
                    dmin = 0 if (a == 0 or a <= scale <= b) else min(tent_a, tent_b)
                    half = a <= scale // 2 <= b or a <= scale + scale // 2 <= b
                    dmax = scale if half else max(tent_a, tent_b)
                    if dmax * e_den <= e_num * scale:
                        members.append(n_part)
                    elif dmin * e_den > e_num * scale:
                        pass
                    elif norm_le(n_part, self.point, eps):
                        members.append(n_part)
                continue
            room = (hi - n_part) // qs[i]
            cmax = min(caps[i], room)
            tl, th, q = t_lo[i], t_hi[i], qs[i]
            wn, wp, nr = w_neg[i + 1], w_pos[i + 1], n_rest[i + 1]
            forcing = strict[i]
            for c in range(cmax + 1):
                if forcing is not None and c == forcing and not prev_zero:
                    continue  # non-canonical: digit hit its cap after a nonzero
                n2 = n_part + c * q
                if n2 + nr <= lo:
                    continue
                a2 = s_lo + c * tl
                b2 = s_hi + c * th
                # keep only if a multiple of the scale is reachable
                wl = a2 + wn - e_scaled
                wh = b2 + wp + e_scaled
                if wh // scale < -((-wl) // scale):
                    continue
                stack.append((i + 1, n2, a2, b2, c == 0))
        return sorted(set(members))
