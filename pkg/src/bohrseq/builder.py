"""Staged construction of a strong characterizing sequence.

Each stage t works with the first t generators: it picks a stage tolerance
eps_t from a summable schedule, localizes the small-norm region into a
group ball (M_t), materializes the ball neighborhood (delta_t, V_t),
certifies a Bohr cutoff N_t by exact arc containment, covers the Bohr set
by a verified progression cover, and replaces it with a thin set S_t
anchored deep inside the Bohr structure.  The output sequence is the
ordered union of the S_t; its per-stage power sums carry exact
certificates against the schedule terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .approx import (GroupBall, StagePlan, cross_gap, enumerate_group_ball,
                     find_covering_N, find_localization_M, first_member_above,
                     plan_stage, single_surd_cross_gap)
from .bohr import BohrSet, GapCover, decompose_gap, enumerate_bohr
from .errors import (BohrseqError, BudgetExceededError, CertificateError,
                     InvalidInputError, StageBuildError)
from .ratmath import log2_bounds, pow_lower, pow_upper, root_lower
from .torus import TorusPoint, make_point, norm_upper_bound


@dataclass(frozen=True)
class ThinSet:
    """A short set replacing а Bohr set: anchor m plus doubled cover scales,
    with a certified bound on the power sums over the generators."""

    anchor: int
    members: tuple[int, ...]
    source_cover: GapCover
    eps: Fraction
    r: Fraction
    bound_ii: Fraction


@dataclass
class StageArtifacts:
    """Everything one stage certifies, for downstream verification."""

    t: int
    alphas: tuple[TorusPoint, ...]
    plan: StagePlan
    bohr: BohrSet
    cover: GapCover
    thin: ThinSet
    c1: int
    c2: int
    term: Fraction  # certified upper bound of c2 * eps^(1/t) / (2^(1/t)-1)
    cert_ii: bool
    cert_ordering: bool
    lookahead_M: int | None = None

    def report_row(self) -> dict:
        return {
            "stage": self.t,
            "eps_t": str(self.plan.eps),
            "N_t": self.plan.limit,
            "M_t": self.plan.M,
            "delta_t": str(self.plan.delta),
            "c1": self.c1,
            "c2": self.c2,
            "term_t": str(self.term),
            "S_size": len(self.thin.members),
            "certificates": {"ii": self.cert_ii, "ordering": self.cert_ordering},
        }


def power_cost_constant(c1: int) -> int:
    """The derived constant bounding thin-set power sums: c1 + 16*c1^2."""
    return c1 + 16 * c1 * c1


def term_upper_bound(t: int, c2: int, eps: Fraction) -> Fraction:
    """Certified rational upper bound of c2 * eps^(1/t) / (2^(1/t) - 1)."""
    den = root_lower(2, t) - 1
    if den <= 0:
        raise InvalidInputError("root precision too low")
    return c2 * pow_upper(eps, Fraction(1, t)) / den


def stage_epsilon(t: int, c1_hat) -> Fraction:
    """Largest power of two eps with eps <= 1/(2*c1_hat) and a certified
    schedule term c2_hat * eps^(1/t) / (2^(1/t)-1) <= 2^-t."""
    if t < 1:
        raise InvalidInputError("t must be >= 1")
    c1 = max(1, -((-Fraction(c1_hat).numerator) // Fraction(c1_hat).denominator))
    c2 = power_cost_constant(c1)
    cap = Fraction(1, 2 * c1)
    goal = Fraction(1, 1 << t)

    def ok(j: int) -> bool:
        eps = Fraction(1, 1 << j)
        return eps <= cap and term_upper_bound(t, c2, eps) <= goal

    import math
    seed = ((2 ** (1 / t) - 1) * 2.0 ** -t) / c2
    j = max(1, int(-t * math.log2(seed)) - 2)
    while not ok(j):
        j += 1
    while j > 1 and ok(j - 1):
        j -= 1
    return Fraction(1, 1 << j)


def choose_anchor(alphas, eps, r, N: int, U: int, c1: int,
                  search_budget: int = 1 << 48,
                  node_budget: int = 50_000_000) -> int:
    """Smallest m > U with every ||m*alpha_j|| below the anchor threshold
    eps / lg2(8*c1^2*N)^(1/r), the threshold taken as a certified rational
    lower bound (log and power bounds rounded the safe way)."""
    alphas = tuple(make_point(a) for a in alphas)
    eps, r = Fraction(eps), Fraction(r)
    if not 0 < r <= 1:
        raise InvalidInputError("need 0 < r <= 1")
    if c1 < 1 or N < 1:
        raise InvalidInputError("need c1 >= 1 and N >= 1")
    _, log_hi = log2_bounds(Fraction(8 * c1 * c1 * N))
    threshold = eps / pow_upper(log_hi, 1 / r)
    m = first_member_above(alphas, threshold, U, search_budget, node_budget)
    if m is None:
        raise BudgetExceededError("anchor search budget exhausted",
                                  U=U, threshold=str(threshold))
    return m


def build_thin_set(alphas, eps, r, N: int, U: int,
                   cover: GapCover | None = None,
                   H: BohrSet | None = None,
                   node_budget: int = 50_000_000) -> ThinSet:
    """The thin replacement set S = {m + 2^l |n_i| : 2^l <= 8 K_i R} for a
    verified cover of the Bohr set, with the power-sum certificate checked
    as an exact inequality (raises CertificateError when it fails)."""
    alphas = tuple(make_point(a) for a in alphas)
    eps, r = Fraction(eps), Fraction(r)
    if H is None:
        H = enumerate_bohr(alphas, eps, N, node_budget)
    if cover is None:
        cover = decompose_gap(H)
    c1 = cover.c1
    if eps > Fraction(1, c1):
        raise InvalidInputError(f"eps={eps} exceeds 1/c1=1/{c1}")
    m = choose_anchor(alphas, eps, r, N, U, c1, node_budget=node_budget)

    R = cover.R
    members = set()
    for n, K in cover.generators:
        l = 0
        while (1 << l) <= 8 * K * R:
            members.add(m + (1 << l) * abs(n))
            l += 1
    members = tuple(sorted(members))

    c2 = power_cost_constant(c1)
    rhs_lo = c2 * pow_lower(eps, r) / (pow_upper(2, r) - 1)
    worst = Fraction(0)
    for alpha in alphas:
        total = Fraction(0)
        for n in members:
            nb = norm_upper_bound(alpha.value.scale(n))
            total += pow_upper(nb, r) if nb > 0 else Fraction(0)
        worst = max(worst, total)
    if worst > rhs_lo:
        raise CertificateError(
            f"power-sum certificate failed: {float(worst):.6g} > {float(rhs_lo):.6g} "
            f"(c1={c1}, eps={eps})")
    return ThinSet(m, members, cover, eps, r, worst)


def _trial_cover_constant(alphas, node_budget: int) -> int:
    """Cheap estimate of the cover constant from a small-scale decomposition."""
    eps0 = Fraction(1, 256)
    first = first_member_above(alphas, eps0, 0, 1 << 32, node_budget)
    if first is None:
        return 1
    H = enumerate_bohr(alphas, eps0, 32 * first, node_budget)
    if not H.members:
        return 1
    return decompose_gap(H).c1


def _lookahead_bound(generators, t: int, alphas, M: int, ball: GroupBall,
                     c1_hat: int, point_budget: int,
                     node_budget: int) -> tuple[Fraction | None, int | None]:
    """Cross-gap bound against the (estimated) next-stage ball.

    Returns (cross_bound, committed_M_next); (None, M) means the next ball
    adds no points."""
    alphas_next = tuple(make_point(g) for g in generators[:min(t + 1, len(generators))])
    eps_next = stage_epsilon(t + 1, c1_hat)

    if all(a.is_rational for a in alphas_next):
        # rational prefixes saturate to a finite subgroup
        mm, prev_ball = 1, None
        while True:
            nxt = enumerate_group_ball(alphas_next, mm, point_budget)
            if prev_ball is not None and nxt.value_set() == prev_ball.value_set():
                return cross_gap(ball, prev_ball), mm
            prev_ball, mm = nxt, mm + 1

    if len(alphas_next) == 1 and not alphas_next[0].is_rational:
        est = 2 * max(1, int(Fraction(1, 6) / eps_next)) + 16
        return single_surd_cross_gap(alphas_next[0], M, est), est

    est = max(1, int(Fraction(1, 6) / eps_next))
    nxt = enumerate_group_ball(alphas_next, est, point_budget)
    return cross_gap(ball, nxt), est


def build_stage(t: int, generators, prev: StageArtifacts | None = None,
                c1_hint: int | None = None,
                point_budget: int = 3_000_000,
                arc_budget: int = 400_000,
                n_budget: int = 1 << 44,
                node_budget: int = 50_000_000) -> StageArtifacts:
    """Build one pipeline stage; rebuilds once if the realized cover
    constant overshoots the estimate, then errors."""
    generators = tuple(make_point(g) for g in generators)
    if t < 1 or not generators:
        raise InvalidInputError("need t >= 1 and at least one generator")
    alphas = generators[:min(t, len(generators))]
    U = prev.thin.members[-1] if prev else 0

    c1_hat = c1_hint
    if c1_hat is None:
        c1_hat = prev.c1 if prev is not None else _trial_cover_constant(alphas, node_budget) + 4

    for attempt in range(2):
        eps = stage_epsilon(t, c1_hat)
        M = find_localization_M(alphas, eps, point_budget=point_budget,
                                arc_budget=arc_budget, node_budget=node_budget)
        ball = enumerate_group_ball(alphas, M, point_budget)
        cross, committed = _lookahead_bound(generators, t, alphas, M, ball,
                                            c1_hat, point_budget, node_budget)
        delta, region, ball = plan_stage(
            t, alphas, M, cross_bound=cross,
            prev_delta=prev.plan.delta if prev else None,
            point_budget=point_budget, ball=ball)
        N = find_covering_N(alphas, eps, region, n_budget=n_budget,
                            arc_budget=arc_budget, node_budget=node_budget)
        H = enumerate_bohr(alphas, eps, N, node_budget)
        cover = decompose_gap(H)
        if cover.c1 <= c1_hat:
            break
        if attempt == 1:
            raise StageBuildError(t, f"cover constant {cover.c1} still above "
                                     f"the rebuilt estimate {c1_hat}")
        c1_hat = cover.c1 + 4

    thin = build_thin_set(alphas, eps, Fraction(1, t), N, U, cover=cover, H=H,
                          node_budget=node_budget)
    c1 = cover.c1
    c2 = power_cost_constant(c1)
    term = term_upper_bound(t, c2, eps)
    if term > Fraction(1, 1 << t):
        raise StageBuildError(t, f"schedule term {float(term):.3g} above 2^-{t}")
    plan = StagePlan(t, M, delta, region, eps, N)
    return StageArtifacts(
        t=t, alphas=alphas, plan=plan, bohr=H, cover=cover, thin=thin,
        c1=c1, c2=c2, term=term, cert_ii=True,
        cert_ordering=(U < thin.members[0]), lookahead_M=committed)


def stream_sequence(generators, stages: int,
                    point_budget: int = 3_000_000,
                    arc_budget: int = 400_000,
                    n_budget: int = 1 << 44,
                    node_budget: int = 50_000_000):
    """Yield stage artifacts in order; a failing stage aborts the stream
    (earlier stages remain valid).  The concatenated thin sets are strictly
    increasing, which each stage certifies against its predecessor."""
    if stages < 1:
        raise InvalidInputError("need at least one stage")
    generators = tuple(make_point(g) for g in generators)
    prev = None
    for t in range(1, stages + 1):
        try:
            art = build_stage(t, generators, prev,
                              point_budget=point_budget, arc_budget=arc_budget,
                              n_budget=n_budget, node_budget=node_budget)
        except StageBuildError:
            raise
        except BohrseqError as exc:
            raise StageBuildError(t, exc) from exc
        if prev is not None and prev.lookahead_M is not None and art.plan.M > prev.lookahead_M:
            # the committed next-ball estimate was too small; re-verify the
            # separation condition against the realized ball
            try:
                if len(art.alphas) == 1 and not art.alphas[0].is_rational:
                    fresh = single_surd_cross_gap(art.alphas[0], prev.plan.M, art.plan.M)
                else:
                    fresh = cross_gap(enumerate_group_ball(prev.alphas, prev.plan.M, point_budget),
                                      enumerate_group_ball(art.alphas, art.plan.M, point_budget))
            except BohrseqError as exc:
                raise StageBuildError(t, exc) from exc
            if fresh is not None and not prev.plan.delta + art.plan.delta < fresh:
                raise StageBuildError(t, "stage separation broke under the realized ball")
        yield art
        prev = art


def build_sequence(generators, stages: int, **budgets) -> list[StageArtifacts]:
    """Materialized stream_sequence."""
    return list(stream_sequence(generators, stages, **budgets))
