"""Finite group balls, nested open approximations, and the two searches
that make the containment arguments constructive.

A group ball collects all integer combinations of the generators with
coefficients bounded by M.  Stage planning chooses a dyadic radius delta
so that the delta-neighborhoods of consecutive balls separate points
(uniqueness of the nearby ball point, and no jumping between stages), and
materializes the neighborhood as an exact arc set.  The searches:

  * find_localization_M grows the Bohr cutoff until the region
    {beta : ||beta H|| <= 1/6} visibly collapses onto a group ball, and
    reports the coefficient bound M of that ball;
  * find_covering_N certifies, by exact arc containment, a cutoff N such
    that the constraint region of H_{N,eps} lies inside a target arc set.
"""

from __future__ import annotations

import functools
import itertools
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction

from .arcs import ArcSet, arcs_around, intersect_constraint
from .bohr import enumerate_bohr
from .errors import BudgetExceededError, InvalidInputError
from .ostrowski import ladder_for
from .quadext import QuadExt
from .torus import TorusPoint, make_point, norm_interval_of, point_from_value

SIXTH = Fraction(1, 6)

_DEFAULT_POINT_BUDGET = 3_000_000
_DEFAULT_ARC_BUDGET = 400_000


@dataclass
class GroupBall:
    """All combinations k_1 a_1 + ... + k_t a_t with |k_i| <= M, deduplicated
    exactly and sorted by circle position."""

    alphas: tuple[TorusPoint, ...]
    M: int
    points: tuple[TorusPoint, ...]
    _index: tuple | None = None

    def value_set(self) -> frozenset:
        return frozenset(p.value for p in self.points)

    def approx_index(self):
        """Cached (approximants, points) sorted by position; approximants
        are within 2**-101 of the exact values."""
        if self._index is None:
            pairs = sorted(((p.approximant(100), p) for p in self.points),
                           key=lambda kp: kp[0])
            self._index = ([k for k, _ in pairs], [p for _, p in pairs])
        return self._index


def enumerate_group_ball(alphas, M: int,
                         point_budget: int = _DEFAULT_POINT_BUDGET) -> GroupBall:
    alphas = tuple(make_point(a) for a in alphas)
    if M < 1:
        raise InvalidInputError("M must be >= 1")
    t = len(alphas)
    if t < 1:
        raise InvalidInputError("need at least one generator")
    if (2 * M + 1) ** t > point_budget:
        raise BudgetExceededError("group ball budget exceeded",
                                  M=M, t=t, points=(2 * M + 1) ** t)
    seen: dict[QuadExt, None] = {}
    for coeffs in itertools.product(range(-M, M + 1), repeat=t):
        acc = QuadExt.from_rational(0)
        for a, k in zip(alphas, coeffs):
            if k:
                acc = acc + a.value.scale(k)
        seen.setdefault(acc.mod1(), None)
    points = [point_from_value(v) for v in seen]
    keyed = sorted(points, key=lambda p: p.approximant(100))
    for x, y in zip(keyed, keyed[1:]):  # approximant order is exact unless
        if x.value.compare(y.value) > 0:  # two points are absurdly close
            keyed = sorted(points, key=functools.cmp_to_key(lambda u, v: u.value.compare(v.value)))
            break
    return GroupBall(alphas, M, tuple(keyed))


def _distance_bounds(x: QuadExt, y: QuadExt) -> tuple[Fraction, Fraction]:
    """Certified bounds on the circle distance ||x - y||, with the lower
    bound at least half the true distance."""
    diff = (x - y).mod1()
    if diff.is_rational:
        f = diff.as_fraction()
        d = min(f, 1 - f)
        return d, d
    k = 64
    while True:
        v = norm_interval_of(diff, k)
        if v.lo > 0 and v.hi <= 2 * v.lo:
            return v.lo, v.hi
        k *= 2


def min_gap(ball: GroupBall) -> Fraction:
    """Certified lower bound on the smallest distance between distinct ball
    points (exact for rational balls, at least half the truth otherwise)."""
    if len(ball.points) < 2:
        raise InvalidInputError("min_gap needs at least 2 points")
    if len(ball.alphas) == 1:
        lo, _ = ladder_for(ball.alphas[0]).min_norm_up_to(2 * ball.M)
        if lo > 0:
            return lo
        # rational generator: distinct points live on a 1/q grid
        q = ball.alphas[0].as_fraction().denominator
        return Fraction(1, q)
    best = None
    pts = ball.points
    for i in range(len(pts)):
        j = (i + 1) % len(pts)
        lo, _ = _distance_bounds(pts[i].value, pts[j].value)
        if best is None or lo < best:
            best = lo
    return best


def cross_gap(ball: GroupBall, next_ball: GroupBall) -> Fraction | None:
    """Certified lower bound on dist(ball, next_ball minus ball); None when
    the difference is empty (the next ball brings no new points)."""
    base = ball.value_set()
    fresh = [p for p in next_ball.points if p.value not in base]
    if not fresh:
        return None
    best = None
    for p in ball.points:
        for q in fresh:
            lo, _ = _distance_bounds(p.value, q.value)
            if best is None or lo < best:
                best = lo
    return best


def single_surd_cross_gap(alpha: TorusPoint, M: int, M_next: int) -> Fraction:
    """Analytic cross-gap for one irrational generator: the two balls differ
    exactly by the points k*alpha with M < |k| <= M_next, so the distance is
    min of ||j*alpha|| over 1 <= j <= M + M_next (best approximation)."""
    lo, _ = ladder_for(alpha).min_norm_up_to(M + M_next)
    if lo <= 0:
        raise InvalidInputError("generator is rational; use cross_gap on balls")
    return lo


@dataclass
class StagePlan:
    """Per-stage approximation data: ball bound, radius, arcs, Bohr scale."""

    t: int
    M: int
    delta: Fraction
    region: ArcSet  # the materialized neighborhood of the stage ball
    eps: Fraction | None = None
    limit: int | None = None  # certified Bohr cutoff


def plan_stage(t: int, alphas, M: int, next_ball: GroupBall | None = None,
               cross_bound: Fraction | None = None,
               prev_delta: Fraction | None = None,
               point_budget: int = _DEFAULT_POINT_BUDGET,
               ball: GroupBall | None = None) -> tuple[Fraction, ArcSet, GroupBall]:
    """Choose the stage radius delta and materialize the ball neighborhood.

    delta is the largest power of two satisfying, as strict exact
    inequalities: 2*delta < min_gap(ball); delta + delta/2 < cross-gap to
    the next ball (when it adds points); delta <= prev_delta / 2."""
    alphas = tuple(make_point(a) for a in alphas)
    if ball is None:
        ball = enumerate_group_ball(alphas, M, point_budget)
    if next_ball is not None and cross_bound is None:
        cross_bound = cross_gap(ball, next_ball)
    gap = min_gap(ball) if len(ball.points) >= 2 else None

    j = 3  # delta <= 1/8 always (a gap below 1/2 forces it anyway)
    while True:
        delta = Fraction(1, 1 << j)
        ok = True
        if prev_delta is not None and delta > prev_delta / 2:
            ok = False
        if gap is not None and not 2 * delta < gap:
            ok = False
        if cross_bound is not None and not delta + delta / 2 < cross_bound:
            ok = False
        if ok:
            break
        j += 1
        if j > 1 << 16:
            raise BudgetExceededError("cannot certify a stage radius", stage=t)

    guard = Fraction(1, 1 << 20)
    radius = delta * (1 - guard)
    enc_bits = j + 24
    centers = [p.enclosure(enc_bits) for p in ball.points]
    region = arcs_around(centers, radius)
    return delta, region, ball


def bohr_members_window(alphas, eps, lo: int, hi: int,
                        node_budget: int = 50_000_000) -> list[int]:
    """Members of the Bohr set inside the window (lo, hi]."""
    alphas = tuple(make_point(a) for a in alphas)
    if len(alphas) >= 1 and not all(a.is_rational for a in alphas):
        from .bohr import _single_radical
        idx = next((i for i, a in enumerate(alphas)
                    if not a.is_rational and _single_radical(a)), None)
        if idx is not None:
            from .torus import norm_le
            base = ladder_for(alphas[idx]).enumerate_members(Fraction(eps), lo, hi, node_budget)
            rest = [a for i, a in enumerate(alphas) if i != idx]
            return [n for n in base if all(norm_le(n, a, Fraction(eps)) for a in rest)]
    members = enumerate_bohr(alphas, eps, hi, node_budget).members
    return [n for n in members if n > lo]


def first_member_above(alphas, eps, lo: int, hi_budget: int,
                       node_budget: int = 50_000_000) -> int | None:
    """Smallest Bohr member exceeding lo, searched in doubling windows."""
    start, end = lo, max(2 * lo, 16)
    while start < hi_budget:
        end = min(end, hi_budget)
        found = bohr_members_window(alphas, eps, start, end, node_budget)
        if found:
            return found[0]
        start, end = end, end * 2
    return None


def _arcs_meet_ball(region: ArcSet, ball: GroupBall) -> bool:
    """Does every arc of the region contain at least one ball point?"""
    approxs, pts = ball.approx_index()
    tol = Fraction(1, 1 << 99)
    for a, b in region.arcs:
        found = False
        if b <= 1:
            segs = [(a, b)]
        else:
            segs = [(a, Fraction(1)), (Fraction(0), b - 1)]
        for lo_end, hi_end in segs:
            i0 = bisect_left(approxs, lo_end - tol)
            i1 = bisect_right(approxs, hi_end + tol)
            for idx in range(i0, i1):
                k = approxs[idx]
                # approximants are 2**-101-accurate: strict interior hits
                # need no exact arithmetic
                if lo_end + tol <= k <= hi_end - tol:
                    found = True
                    break
                v = pts[idx].value
                if v.compare(QuadExt.from_rational(lo_end)) >= 0 and \
                   v.compare(QuadExt.from_rational(hi_end)) <= 0:
                    found = True
                    break
            if found:
                break
        if not found:
            return False
    return True


def _float_pieces_intersect(pieces, n: int, c: float):
    """Float probe region update: pieces are sorted [lo, hi] sub-intervals
    of [0, 1] (wrap arcs split at 0)."""
    import math
    out = []
    r = c / n
    for lo, hi in pieces:
        k0 = math.ceil(n * lo - c)
        k1 = math.floor(n * hi + c)
        for k in range(k0, k1 + 1):
            a = max(lo, k / n - r)
            b = min(hi, k / n + r)
            if a <= b:
                out.append((a, b))
    return out


def find_localization_M(alphas, eps, probe_schedule=None,
                        point_budget: int = _DEFAULT_POINT_BUDGET,
                        arc_budget: int = _DEFAULT_ARC_BUDGET,
                        probe_limit: int = 1 << 40,
                        node_budget: int = 50_000_000) -> int:
    """Coefficient bound M such that the region {||beta H_{N,eps}|| <= 1/6}
    collapses onto the M-ball of the generators: probes grow N until every
    arc is short (below half the ball min-gap) and contains a ball point,
    then report the smallest such M.

    The probe itself runs in floating point: M only selects the stage ball,
    and every use of that choice is re-certified exactly downstream (arc
    containment in find_covering_N, exact stage-radius inequalities).  For
    a single irrational generator no M below floor(1/(6 eps)) can ever
    absorb the region, since all those multiples satisfy every constraint.
    """
    alphas = tuple(make_point(a) for a in alphas)
    eps = Fraction(eps)
    if eps <= 0:
        raise InvalidInputError("eps must be positive")

    hint = 1
    if len(alphas) == 1 and not alphas[0].is_rational:
        hint = max(1, int(Fraction(1, 6) / eps))
        if 2 * hint + 1 > point_budget:
            raise BudgetExceededError(
                "localization bound exceeds the ball budget",
                needed=hint, point_budget=point_budget)

    seed = first_member_above(alphas, eps, 0, probe_limit, node_budget)
    if seed is None:
        raise BudgetExceededError("no Bohr member within the probe limit",
                                  probe_limit=probe_limit)
    if probe_schedule is None:
        probe_schedule = (seed * (1 << i) for i in range(1, 41))

    m_cap = max(64, 8 * hint)
    gen_floats = [float(a.approximant(80)) for a in alphas]
    _floats: dict[int, list[float]] = {}

    def floats_of(M: int) -> list[float]:
        # probe-side ball positions; M selects a candidate only, so plain
        # floating point is enough here
        if M not in _floats:
            if len(gen_floats) == 1:
                a = gen_floats[0]
                pts = {(k * a) % 1.0 for k in range(-M, M + 1)}
            else:
                if (2 * M + 1) ** len(gen_floats) > point_budget:
                    raise BudgetExceededError("group ball budget exceeded",
                                              M=M, t=len(gen_floats))
                pts = {0.0}
                for a in gen_floats:
                    pts = {(p + k * a) % 1.0 for p in pts for k in range(-M, M + 1)}
            _floats[M] = sorted(pts)
        return _floats[M]

    def meets(pieces, M: int) -> bool:
        pts = floats_of(M)
        slack = 1e-11
        for lo, hi in pieces:
            i = bisect_left(pts, lo - slack)
            if i >= len(pts) or pts[i] > hi + slack:
                # a piece at the 0 end may be covered by a point near 1
                if not (lo <= slack and pts and pts[-1] >= 1 - slack) and \
                   not (hi >= 1 - slack and pts and pts[0] <= slack):
                    return False
        return True

    def saturated(M: int) -> bool:
        a = [round(x, 10) for x in floats_of(M)]
        b = [round(x, 10) for x in floats_of(2 * M)]
        return a == b

    def scale_gap(M: int) -> float:
        if len(alphas) == 1:
            if alphas[0].is_rational:
                q = alphas[0].as_fraction().denominator
                lad_lo, _ = ladder_for(alphas[0]).min_norm_up_to(2 * M)
                return float(lad_lo) if lad_lo > 0 else 1.0 / q
            lo, _ = ladder_for(alphas[0]).min_norm_up_to(2 * M)
            return float(lo)
        pts = floats_of(M)
        if len(pts) < 2:
            return 1.0
        return min(min(b - a for a, b in zip(pts, pts[1:])),
                   1.0 - pts[-1] + pts[0])

    pieces = None
    done = 0
    for N in probe_schedule:
        if N > probe_limit:
            break
        window = bohr_members_window(alphas, eps, done, N, node_budget)
        if len(window) > 64:  # a spread subset of constraints still localizes
            step = len(window) // 64
            window = window[::step] + [window[-1]]
        for n in window:
            if pieces is None:
                c = 1.0 / 6.0
                r = c / n
                pieces = [(max(0.0, k / n - r), min(1.0, k / n + r))
                          for k in range(0, n + 1)]
            else:
                pieces = _float_pieces_intersect(pieces, n, 1.0 / 6.0)
            if len(pieces) > arc_budget:
                raise BudgetExceededError("arc budget exceeded while probing",
                                          arcs=len(pieces))
        done = N
        if pieces is None or not pieces:
            continue

        # grow M until the ball meets every piece (or give up at this N)
        M, good = hint, None
        while M <= m_cap:
            if meets(pieces, M):
                good = M
                break
            if 2 * M > m_cap:
                break
            if saturated(M):
                break  # saturated; only a deeper Bohr set can help
            M = 2 * M
        if good is None:
            continue
        lo = hint
        while lo < good:  # smallest meeting M within [hint, good]
            mid = (lo + good) // 2
            if meets(pieces, mid):
                good = mid
            else:
                lo = mid + 1
        max_len = max(b - a for a, b in pieces)
        if len(floats_of(good)) >= 2 and 2 * max_len > scale_gap(good):
            continue  # arcs not yet short at this scale; deepen the probe
        return good
    raise BudgetExceededError("probe schedule exhausted: arcs not yet localized",
                              probed=done,
                              arcs=0 if pieces is None else len(pieces))


def find_covering_N(alphas, eps, target: ArcSet,
                    n_budget: int = 1 << 44,
                    arc_budget: int = _DEFAULT_ARC_BUDGET,
                    node_budget: int = 50_000_000,
                    dense_cap: int = 20_000) -> int:
    """Smallest certified cutoff N (within the search bracket) such that the
    exact region of {beta : ||n beta|| <= 1/6 for all Bohr members n <= N}
    lies inside the target arc set.

    Constraints are applied along a roughly doubling chain of members (a
    subset certificate is still sound: more constraints only shrink the
    region), densifying if the sparse chain stalls."""
    alphas = tuple(make_point(a) for a in alphas)
    eps = Fraction(eps)
    if target.is_full:
        return 1
    if target.is_empty:
        raise InvalidInputError("target region is empty")

    region = ArcSet.full()
    processed: list[int] = []

    def refined_minimum() -> int:
        lo, hi = 0, len(processed) - 1  # prefix through index hi certifies
        while lo < hi:
            mid = (lo + hi) // 2
            r = ArcSet.full()
            for n in processed[:mid + 1]:
                r = intersect_constraint(r, n, SIXTH)
            if target.contains(r):
                hi = mid
            else:
                lo = mid + 1
        return processed[lo]

    last = 0
    while True:
        n = first_member_above(alphas, eps, last, n_budget, node_budget)
        if n is None:
            break
        region = intersect_constraint(region, n, SIXTH)
        processed.append(n)
        if len(region.arcs) > arc_budget:
            raise BudgetExceededError("arc budget exceeded", arcs=len(region.arcs))
        if target.contains(region):
            return refined_minimum()
        last = 2 * n - 1  # next constraint: first member >= 2n
        if len(processed) >= 48:
            break

    # Dense phase: apply every remaining member in ascending order.
    last = 0
    region = ArcSet.full()
    processed = []
    count = 0
    while count < dense_cap:
        window_hi = max(2 * last, 16)
        members = bohr_members_window(alphas, eps, last, min(window_hi, n_budget), node_budget)
        for n in members:
            region = intersect_constraint(region, n, SIXTH)
            processed.append(n)
            count += 1
            if len(region.arcs) > arc_budget:
                raise BudgetExceededError("arc budget exceeded", arcs=len(region.arcs))
            if count % 64 == 0 and target.contains(region):
                break
        if processed and target.contains(region):
            return refined_minimum()
        last = window_hi
        if last >= n_budget:
            uncovered = next((list(a) for a in region.arcs
                              if not target.contains(ArcSet((tuple(a),)))), None)
            raise BudgetExceededError("cutoff budget exhausted without containment",
                                      uncovered_arc=[str(x) for x in (uncovered or [])])
    raise BudgetExceededError("constraint budget exhausted without containment",
                              constraints=count)
