"""Finite Bohr sets, certified progression covers, and norm-constraint arcs.

A finite Bohr set collects the n <= N whose multiples n*alpha_j all stay
within eps of an integer.  Such sets carry generalized-arithmetic-
progression structure: this module decomposes them into certified covers
{sum k_i n_i : 1 <= k_i <= K_i} together with exact cost constants, and
computes the exact arc regions {beta : ||n beta|| <= c for all n in H}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm, prod

from .arcs import ArcSet, intersect_constraint
from .errors import BudgetExceededError, InvalidInputError
from .ostrowski import ladder_for
from .torus import TorusPoint, norm_le, norm_upper_bound, make_point

_PERIOD_CAP = 1_000_000
_SCAN_CAP = 5_000_000
_DEFAULT_DP_BUDGET = 10_000_000
_DEFAULT_ARC_BUDGET = 400_000


@dataclass(frozen=True)
class BohrSet:
    """Members {n <= limit : ||n*alpha_j|| <= eps for all j}, certified."""

    alphas: tuple[TorusPoint, ...]
    eps: Fraction
    limit: int
    members: tuple[int, ...]

    def __len__(self):
        return len(self.members)


def _rational_members_period(fracs, eps: Fraction, N: int):
    period = 1
    for f in fracs:
        period = lcm(period, f.denominator)
        if period > _PERIOD_CAP:
            return None
    en, ed = eps.numerator, eps.denominator
    good = []
    for r in range(period):
        ok = True
        for f in fracs:
            q = f.denominator
            rr = (r * f.numerator) % q
            if min(rr, q - rr) * ed > en * q:
                ok = False
                break
        if ok:
            good.append(r)
    members = []
    for base in range(0, N + 1, period):
        for r in good:
            n = base + r
            if 1 <= n <= N:
                members.append(n)
    return sorted(members)


def _rational_members_numpy(fracs, eps: Fraction, N: int):
    import numpy as np

    en, ed = eps.numerator, eps.denominator
    lim = 1 << 62
    for f in fracs:
        if f.numerator * N >= lim or ed * f.denominator >= lim or en * f.denominator >= lim:
            return None
    ns = np.arange(1, N + 1, dtype=np.int64)
    mask = np.ones(N, dtype=bool)
    for f in fracs:
        p, q = f.numerator, f.denominator
        r = (ns * p) % q
        r = np.minimum(r, q - r)
        mask &= (r * ed) <= (en * q)
    return [int(n) for n in ns[mask]]


def _single_radical(alpha: TorusPoint) -> bool:
    try:
        alpha.value.single_radical()
        return True
    except InvalidInputError:
        return False


def enumerate_bohr(alphas, eps, N: int, node_budget: int = 50_000_000) -> BohrSet:
    """Exact member list of the finite Bohr set.

    Rational generators use residue periodicity or a vectorized sweep;
    a single quadratic-surd generator is enumerated along its convergent
    ladder (no scan, sound for very large N); mixed inputs enumerate the
    surd and filter with certified norm checks.
    """
    alphas = tuple(make_point(a) for a in alphas)
    eps = Fraction(eps)
    if eps <= 0:
        raise InvalidInputError("eps must be positive")
    if N < 1:
        raise InvalidInputError("limit must be >= 1")
    if not alphas:
        raise InvalidInputError("need at least one generator")

    if all(a.is_rational for a in alphas):
        fracs = [a.as_fraction() for a in alphas]
        members = _rational_members_period(fracs, eps, N)
        if members is None and N <= _SCAN_CAP:
            members = _rational_members_numpy(fracs, eps, N)
        if members is None:
            if N > _SCAN_CAP:
                raise BudgetExceededError("rational Bohr sweep too large", limit=N)
            en, ed = eps.numerator, eps.denominator
            members = []
            for n in range(1, N + 1):
                for f in fracs:
                    q = f.denominator
                    r = (n * f.numerator) % q
                    if min(r, q - r) * ed > en * q:
                        break
                else:
                    members.append(n)
        return BohrSet(alphas, eps, N, tuple(members))

    surd_idx = next((i for i, a in enumerate(alphas)
                     if not a.is_rational and _single_radical(a)), None)
    if surd_idx is not None:
        base = ladder_for(alphas[surd_idx]).enumerate_members(eps, 0, N, node_budget)
        rest = [a for i, a in enumerate(alphas) if i != surd_idx]
        members = [n for n in base if all(norm_le(n, a, eps) for a in rest)]
        return BohrSet(alphas, eps, N, tuple(members))

    if N > _SCAN_CAP:
        raise BudgetExceededError("no ladder generator and limit too large for a scan", limit=N)
    members = tuple(n for n in range(1, N + 1)
                    if all(norm_le(n, a, eps) for a in alphas))
    return BohrSet(alphas, eps, N, members)


@dataclass(frozen=True)
class GapCover:
    """A certified progression cover {sum k_i n_i : 1 <= k_i <= K_i}.

    achieved_a = max_j sum_i K_i ||n_i alpha_j|| / eps   (norm cost)
    achieved_b = sum_i K_i |n_i| / N                     (size cost)
    """

    generators: tuple[tuple[int, int], ...]
    achieved_a: Fraction
    achieved_b: Fraction
    containment_verified: bool

    @property
    def R(self) -> int:
        return len(self.generators)

    @property
    def c1(self) -> int:
        worst = max(Fraction(self.R), self.achieved_a, self.achieved_b, Fraction(1))
        return -((-worst.numerator) // worst.denominator)

    def to_json(self) -> dict:
        return {
            "generators": [{"n": n, "K": k} for n, k in self.generators],
            "achieved_a": str(self.achieved_a),
            "achieved_b": str(self.achieved_b),
            "R": self.R,
            "c1": self.c1,
        }


def cover_costs(H: BohrSet, generators) -> tuple[Fraction, Fraction]:
    """Exact (achieved_a, achieved_b) of a generator list against H."""
    b = sum(Fraction(K * abs(n)) for n, K in generators) / H.limit
    a = Fraction(0)
    for alpha in H.alphas:
        s = sum(K * norm_upper_bound(alpha.value.scale(abs(n))) for n, K in generators)
        a = max(a, s / H.eps)
    return a, b


def verify_cover_containment(H: BohrSet, cover: GapCover,
                             dp_budget: int = _DEFAULT_DP_BUDGET) -> bool:
    """Exact decision of H subset-of {sum k_i n_i : 1 <= k_i <= K_i}.

    Small spans use a bitset subset-sum sweep; otherwise the box is
    enumerated depth-first restricted to the member range.  Raises when
    both exceed the state budget."""
    gens = list(cover.generators) if isinstance(cover, GapCover) else list(cover)
    if not H.members:
        return True
    if any(n == 0 or K < 1 for n, K in gens):
        raise InvalidInputError("generators must be nonzero with K >= 1")
    min_sum = sum(n if n > 0 else K * n for n, K in gens)
    span = sum((K - 1) * abs(n) for n, K in gens)
    lo_m, hi_m = H.members[0], H.members[-1]
    if lo_m < min_sum or hi_m > min_sum + span:
        return False
    if span <= dp_budget:
        bits = 1
        for n, K in gens:
            v, count = abs(n), K - 1
            chunk = 1
            while count > 0:
                step = min(chunk, count)
                bits |= bits << (v * step)
                count -= step
                chunk *= 2
        return all((bits >> (m - min_sum)) & 1 for m in H.members)
    if prod(K for _, K in gens) <= dp_budget:
        reach: set[int] = set()
        max_rest = [0] * (len(gens) + 1)
        min_rest = [0] * (len(gens) + 1)
        for i in range(len(gens) - 1, -1, -1):
            n, K = gens[i]
            max_rest[i] = max_rest[i + 1] + (K * n if n > 0 else n)
            min_rest[i] = min_rest[i + 1] + (n if n > 0 else K * n)
        stack = [(0, 0)]
        while stack:
            i, s = stack.pop()
            if i == len(gens):
                reach.add(s)
                continue
            n, K = gens[i]
            for k in range(1, K + 1):
                s2 = s + k * n
                if s2 + max_rest[i + 1] < lo_m or s2 + min_rest[i + 1] > hi_m:
                    continue
                stack.append((i + 1, s2))
        return all(m in reach for m in H.members)
    raise BudgetExceededError("cover verification exceeds the state budget",
                              span=span, box=prod(K for _, K in gens))


def _candidate_gcd(H: BohrSet):
    g = 0
    for m in H.members:
        g = gcd(g, m)
    if g == 0:
        return None
    return [(g, H.members[-1] // g)]


def _candidate_ladder(H: BohrSet):
    if len(H.alphas) != 1 or not _single_radical(H.alphas[0]):
        return None
    ladder = ladder_for(H.alphas[0])
    levels = ladder.levels_up_to(H.members[-1])
    maxdig = [0] * len(levels)
    for m in H.members:
        for i, c in enumerate(ladder.greedy_digits(m, levels)):
            if c > maxdig[i]:
                maxdig[i] = c
    active = [(lv.q, maxdig[i]) for i, lv in enumerate(levels) if maxdig[i] > 0]
    if not active:
        return None
    if len(active) == 1:
        q, top = active[0]
        return [(q, top)]
    anchor = -sum(q for q, _ in active)
    return [(anchor, 1)] + [(q, top + 1) for q, top in active]


def _candidate_gaps(H: BohrSet):
    mem = H.members
    if len(mem) == 1:
        return [(mem[0], 1)]
    counts: dict[int, int] = {}
    for a, b in zip(mem, mem[1:]):
        counts[b - a] = counts.get(b - a, 0) + 1
    gaps = sorted(counts)
    anchor = mem[0] - sum(gaps)
    ks = [counts[g] + 1 for g in gaps]
    if anchor == 0:
        anchor = -gaps[0]
        ks[0] += 1
    return [(anchor, 1)] + list(zip(gaps, ks))


def decompose_gap(H: BohrSet, dp_budget: int = _DEFAULT_DP_BUDGET) -> GapCover:
    """Build a certified cover of H, preferring small max(R, cost constants).

    Candidate constructions: a single progression on gcd(H); the greedy
    convergent-ladder box for one generator; the consecutive-difference
    chain (always valid).  Every candidate is verified independently; the
    best verified one wins."""
    if not H.members:
        raise InvalidInputError("cannot decompose an empty Bohr set")
    candidates = []
    for build in (_candidate_gcd, _candidate_ladder, _candidate_gaps):
        gens = build(H)
        if gens:
            candidates.append(tuple(gens))
    best = None
    for gens in candidates:
        a, b = cover_costs(H, gens)
        score = max(Fraction(len(gens)), a, b)
        key = (score, len(gens), b)
        if best is not None and key >= best[0]:
            continue
        trial = GapCover(gens, a, b, False)
        try:
            ok = verify_cover_containment(H, trial, dp_budget)
        except BudgetExceededError:
            ok = False
        if ok:
            best = (key, GapCover(gens, a, b, True))
    if best is None:
        raise BudgetExceededError("no candidate cover could be verified",
                                  members=len(H.members))
    return best[1]


def solve_small_norm_set(H, c, arc_budget: int = _DEFAULT_ARC_BUDGET) -> ArcSet:
    """Exact arc region {beta : ||n*beta|| <= c for every n in H}."""
    members = list(H.members) if isinstance(H, BohrSet) else sorted(set(int(n) for n in H))
    c = Fraction(c)
    if not members:
        raise InvalidInputError("need at least one constraint")
    if not 0 < c < Fraction(1, 2):
        raise InvalidInputError("need 0 < c < 1/2")
    if members[0] > arc_budget:
        raise BudgetExceededError("first constraint already exceeds the arc budget",
                                  n=members[0])
    region = ArcSet.full()
    for n in members:
        region = intersect_constraint(region, n, c)
        if region.is_empty:
            break
        if len(region.arcs) > arc_budget:
            raise BudgetExceededError("arc budget exceeded", arcs=len(region.arcs))
    return region
