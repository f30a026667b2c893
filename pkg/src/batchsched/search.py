"""Variant-generic makespan search: bisection to a (3/2+eps) guarantee,
plus the result/reporting types shared by all search strategies."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import (
    Accepted,
    ContractError,
    DualOutcome,
    Instance,
    Rat,
    Schedule,
    ValidationError,
    Variant,
    lower_bound_tmin,
)


@dataclass
class SearchResult:
    """Outcome of a makespan search.

    guess        the accepted makespan guess the schedule was built for
    schedule     feasible schedule with makespan <= (3/2) * guess
    lower_bound  certified bound: lower_bound <= OPT (largest rejected probe,
                 the instance lower bound, or the exact-search argument)
    probes       (guess, accepted) pairs in probe order
    """

    guess: Rat
    schedule: Schedule
    lower_bound: Rat
    makespan: Rat
    probes: list[tuple[Rat, bool]] = field(default_factory=list)
    trace: Optional[object] = None


def dual_for(variant: Variant):
    """The 3/2-dual used by the searches.  The preemptive searches walk the
    packed (gamma) flavor of the dual: it never accepts later than the plain
    one and its accept boundary is attained, so exact searches make sense."""
    from . import nonpreemptive, preemptive, splittable

    return {
        Variant.SPLITTABLE: splittable.dual_split,
        Variant.PREEMPTIVE: preemptive.dual_pmtn_packed,
        Variant.NONPREEMPTIVE: nonpreemptive.dual_nonp,
    }[variant]


def epsilon_search(inst: Instance, variant: Variant, eps: Rat) -> SearchResult:
    """Bisect makespan guesses in [T_min, 2*T_min] with the variant's dual.

    Keeps (lo rejected-or-T_min, hi accepted) and stops once hi <= (1+eps)*lo,
    so the schedule is within (3/2)(1+eps) of optimal.  Probe count is at most
    ceil(log2(1/eps)) + 1.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValidationError("eps must be > 0")
    dual = dual_for(variant)
    tmin = lower_bound_tmin(inst, variant)
    probes: list[tuple[Rat, bool]] = []

    def probe(guess: Rat) -> DualOutcome:
        out = dual(inst, guess)
        probes.append((guess, out.accepted))
        return out

    lo = tmin  # certified lower bound by construction, never probed
    hi = 2 * tmin
    out = probe(hi)
    if not out.accepted:
        raise ContractError(f"dual rejected 2*T_min = {hi}; 2-approximation bound broken")
    best: Accepted = out
    lb = tmin
    while hi > (1 + eps) * lo:
        mid = (lo + hi) / 2
        out = probe(mid)
        if out.accepted:
            hi = mid
            best = out
        else:
            lo = mid
            if mid > lb:
                lb = mid
    return SearchResult(
        guess=hi,
        schedule=best.schedule,
        lower_bound=lb,
        makespan=best.schedule.makespan(),
        probes=probes,
    )


@dataclass(frozen=True)
class CertifiedReport:
    makespan: Rat
    lower_bound: Rat
    ratio_bound: Rat  # exact makespan / lower_bound; the schedule is provably
    # within this factor of optimal


def certified_report(result: SearchResult) -> CertifiedReport:
    if result.lower_bound <= 0:
        raise ContractError("lower bound must be positive")
    return CertifiedReport(
        makespan=result.makespan,
        lower_bound=result.lower_bound,
        ratio_bound=result.makespan / result.lower_bound,
    )
