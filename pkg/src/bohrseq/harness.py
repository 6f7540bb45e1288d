"""Verification of built sequences: member power sums against the schedule
terms, non-member witnesses with certified norms at least 1/6, and the
brute-force oracles the property tests compare against.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .arcs import ArcSet, grid_bitmap
from .errors import InvalidInputError
from .ratmath import pow_upper
from .torus import (TorusPoint, make_point, norm_lower_bound, norm_of_fraction,
                    norm_upper_bound, point_to_json, scaled_norm)

SIXTH = Fraction(1, 6)


@dataclass(frozen=True)
class StageView:
    """The slice of a stage that verification needs."""

    t: int
    members: tuple[int, ...]  # the thin set S_t
    term: Fraction


def stage_views(stages) -> list[StageView]:
    """From StageArtifacts or already-built views."""
    out = []
    for s in stages:
        if isinstance(s, StageView):
            out.append(s)
        else:
            out.append(StageView(s.t, s.thin.members, s.term))
    return out


@dataclass
class VerificationReport:
    beta: dict
    mode: str
    r: Fraction | None
    rows: list[dict] = field(default_factory=list)
    verdict: str = ""
    tail_start: int | None = None
    tail_bound: Fraction | None = None

    def to_json(self) -> dict:
        out = {
            "beta": self.beta,
            "mode": self.mode,
            "rows": self.rows,
            "verdict": self.verdict,
        }
        if self.r is not None:
            out["r"] = str(self.r)
        if self.tail_start is not None:
            out["tail_start"] = self.tail_start
            out["tail_bound"] = str(self.tail_bound)
        return out


def verify_member(stages, beta, r, combination=None) -> VerificationReport:
    """Per-stage upper enclosures of sum ||n*beta||^r over the thin sets,
    compared against the schedule terms for the tail stages t >= m with
    m > max(t0, 1/r); t0 is the last generator the declared combination
    uses (membership itself is the caller's declaration, not decided here).
    """
    views = stage_views(stages)
    beta = make_point(beta)
    r = Fraction(r)
    if r <= 0:
        raise InvalidInputError("r must be positive")
    t0 = 1
    if combination:
        nonzero = [i + 1 for i, k in enumerate(combination) if int(k) != 0]
        t0 = max(nonzero) if nonzero else 1
    tail_start = int(max(Fraction(t0), 1 / r)) + 1

    report = VerificationReport(point_to_json(beta), "member", r,
                                tail_start=tail_start,
                                tail_bound=sum((v.term for v in views if v.t >= tail_start),
                                               start=Fraction(0)))
    partial = Fraction(0)
    ok = True
    for v in views:
        stage_sum = Fraction(0)
        worst_n, worst_hi = None, Fraction(0)
        for n in v.members:
            hi = norm_upper_bound(beta.value.scale(n))
            if hi > worst_hi:
                worst_n, worst_hi = n, hi
            if hi > 0:
                stage_sum += pow_upper(hi, r)
        partial += stage_sum
        bounded = stage_sum <= v.term
        if v.t >= tail_start and not bounded:
            ok = False
        report.rows.append({
            "stage": v.t,
            "stage_sum_hi": str(stage_sum),
            "partial_sum_hi": str(partial),
            "term_t": str(v.term),
            "within_term": bounded,
            "max_norm_n": worst_n,
        })
    report.verdict = "tail-bounded" if ok else "tail-bound-violated"
    return report


def verify_nonmember(stages, beta, threshold: Fraction = SIXTH) -> VerificationReport:
    """Scan each thin set for the member with the largest certified lower
    bound of ||n*beta||; stages reaching the threshold yield witnesses."""
    views = stage_views(stages)
    beta = make_point(beta)
    threshold = Fraction(threshold)
    report = VerificationReport(point_to_json(beta), "nonmember", None)
    hits = []
    for v in views:
        best_n, best_lo = None, Fraction(-1)
        for n in v.members:
            lo = norm_lower_bound(beta.value.scale(n))
            if lo > best_lo:
                best_n, best_lo = n, lo
        witness = best_lo >= threshold
        if witness:
            hits.append(v.t)
        report.rows.append({
            "stage": v.t,
            "witness_n": best_n if witness else None,
            "witness_norm_lo": str(best_lo) if witness else None,
            "best_norm_lo": str(best_lo),
        })
    report.verdict = (f"witnesses in stages {hits}" if hits
                      else "no witness found")
    return report


def transfer_holds(H_members, thin_members, beta) -> bool:
    """Exact spot check of the transfer property for one point:
    min(1/6, sup_{n in H} ||n beta||) <= sup_{n in S} ||n beta||."""
    beta = make_point(beta)
    if beta.is_rational:
        f = beta.as_fraction()
        p, q = f.numerator, f.denominator
        sup_H = Fraction(0)
        for n in H_members:
            rr = (n * p) % q
            v = Fraction(min(rr, q - rr), q)
            if v > sup_H:
                sup_H = v
                if sup_H >= SIXTH:
                    break
        lhs = min(SIXTH, sup_H)
        sup_S = max(Fraction(min((n * p) % q, q - (n * p) % q), q) for n in thin_members)
        return lhs <= sup_S
    lhs = Fraction(0)
    for n in H_members:
        lo = norm_lower_bound(beta.value.scale(n))
        lhs = max(lhs, lo)
        if lhs >= SIXTH:
            break
    lhs = min(SIXTH, lhs)
    sup_S = max(norm_upper_bound(beta.value.scale(n)) for n in thin_members)
    return lhs <= sup_S


def oracle_bohr(alphas, eps, N: int) -> list[int]:
    """Naive double-loop Bohr membership; exact, rational generators only."""
    eps = Fraction(eps)
    fracs = []
    for a in alphas:
        a = make_point(a)
        if not a.is_rational:
            raise InvalidInputError("the oracle handles rational generators only")
        fracs.append(a.as_fraction())
    out = []
    for n in range(1, N + 1):
        if all(norm_of_fraction(n * f) <= eps for f in fracs):
            out.append(n)
    return out


def oracle_arcs_membership(region: ArcSet, grid_q: int) -> bytearray:
    """Membership bitmap of the grid {k/grid_q} against an arc set."""
    if grid_q > 100_000:
        raise InvalidInputError("grid_q capped at 1e5")
    return grid_bitmap(region, grid_q)


def oracle_grid_point(constraints, k: int, grid_q: int) -> bool:
    """Independent per-point oracle: does k/grid_q satisfy every constraint
    ||n * x|| <= c?  Pure integer arithmetic."""
    for n, c in constraints:
        r = (n * k) % grid_q
        r = min(r, grid_q - r)
        if r * c.denominator > c.numerator * grid_q:
            return False
    return True
