"""Splittable scheduling: jobs may be cut arbitrarily and run in parallel.

Three entry points: a linear-time 2-approximation, the 3/2-dual decision
procedure for a makespan guess, and an exact-ratio-3/2 search that walks the
guesses at which some class needs one more setup ("class jumping") instead of
bisecting numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    Accepted,
    DualOutcome,
    Instance,
    Rat,
    Rejected,
    Schedule,
)
from .search import SearchResult
from .wrap import Batch, Builder, Gap, run_wrap


def _class_batch(inst: Instance, i: int) -> Batch:
    cl = inst.classes[i]
    return Batch(
        cls=i,
        setup=Fraction(cl.setup),
        jobs=tuple(((i, j), Fraction(t)) for j, t in enumerate(cl.jobs)),
    )


def two_approx_split(inst: Instance) -> tuple[Schedule, Rat]:
    """All classes wrapped into one gap of height N/m per machine, sitting
    above a reserve of s_max for the setups cut loose at gap borders.  The
    first machine needs no reserve, so its gap starts at 0 and a single
    machine yields makespan exactly N."""
    smax = Fraction(inst.s_max)
    per = Fraction(inst.total_load, inst.m)
    builder = Builder(inst.m)
    seq = [_class_batch(inst, i) for i in range(inst.c)]
    run_wrap(
        builder,
        seq,
        [Gap(0, Fraction(0), smax + per)],
        tail_gap=(smax, smax + per),
        tail_count=inst.m - 1,
        tail_base=1,
    )
    sched = builder.finalize()
    return sched, sched.makespan()


def _decide_split(inst: Instance, guess: Rat):
    """(accepted, reason, required load, required machines) for a guess.

    The load/machine thresholds certify rejection: any feasible schedule with
    makespan guess needs ceil(2P_i/guess) setups per class with setup beyond
    guess/2, and distinct machines for all of those.
    """
    if guess <= 0:
        return False, "load", None, None
    if guess < inst.s_max:
        return False, "setup-bound", None, None
    half = guess / 2
    load = Fraction(inst.total_work)
    machines_exp = 0
    for cl in inst.classes:
        if cl.setup > half:
            beta = math.ceil(Fraction(2 * cl.total) / guess)
            load += beta * cl.setup
            machines_exp += beta
        else:
            load += cl.setup
    if inst.m < machines_exp:
        return False, "machines", load, machines_exp
    if inst.m * guess < load:
        return False, "load", load, machines_exp
    return True, "", load, machines_exp


def dual_split(inst: Instance, guess: Rat) -> DualOutcome:
    """Either a schedule with makespan <= (3/2)*guess or a certificate that
    guess < OPT for the splittable variant."""
    ok, reason, _, _ = _decide_split(inst, guess)
    if not ok:
        return Rejected(guess, reason)
    half = guess / 2
    builder = Builder(inst.m)
    base = 0
    leftover_gaps: list[Gap] = []
    cheap: list[int] = []
    for i, cl in enumerate(inst.classes):
        if cl.setup <= half:
            cheap.append(i)
            continue
        s = Fraction(cl.setup)
        beta = math.ceil(Fraction(2 * cl.total) / guess)
        res = run_wrap(
            builder,
            [_class_batch(inst, i)],
            [Gap(base, Fraction(0), s + half)],
            tail_gap=(s, s + half),
            tail_count=beta - 1,
            tail_base=base + 1,
            materialize_last=True,
        )
        # Last machine of the class: reserve half a guess for one cheap setup,
        # then its remaining headroom up to (3/2)*guess is usable.
        if res.last_fill < guess:
            leftover_gaps.append(
                Gap(res.last_machine, res.last_fill + half, Fraction(3, 2) * guess)
            )
        base += beta
    if cheap:
        seq = [_class_batch(inst, i) for i in cheap]
        run_wrap(
            builder,
            seq,
            leftover_gaps,
            tail_gap=(half, Fraction(3, 2) * guess),
            tail_count=inst.m - base,
            tail_base=base,
            setups_below=True,  # half a guess is reserved under every gap
        )
    return Accepted(builder.finalize(), guess)


@dataclass
class JumpTrace:
    """Search internals kept for inspection and for the jump-density checks."""

    setup_interval: tuple[Rat, Rat]  # partition-stable bracket (A, B]
    jump_interval: tuple[Rat, Rat]  # X: between consecutive jumps of the fastest class
    fastest: Optional[int]
    jumps: list[tuple[int, Rat]]  # collected (class, jump) strictly inside X
    final_interval: tuple[Rat, Rat]
    expensive: tuple[int, ...]  # classes expensive throughout the bracket


def _bisect_right_interval(values, probe, lo_idx, hi_idx):
    """Indices into `values` with values[lo_idx] rejected, values[hi_idx]
    accepted; narrows to an adjacent such pair."""
    while hi_idx - lo_idx > 1:
        mid = (lo_idx + hi_idx) // 2
        if probe(values[mid]):
            hi_idx = mid
        else:
            lo_idx = mid
    return lo_idx, hi_idx


def class_jump_split(inst: Instance) -> SearchResult:
    """Exact 3/2-approximation: returns the least guess the dual accepts.

    Every class with setup beyond half the guess needs one more setup each
    time the guess drops past 2P_i/k; between two consecutive such jumps of
    the class with the largest work, every other class jumps at most once, so
    all candidate guesses in the bracket can be collected and bisected, and
    between two neighbours the required load is constant, which pins the
    answer in closed form.
    """
    m = inst.m
    work = [cl.total for cl in inst.classes]
    probes: list[tuple[Rat, bool]] = []
    cache: dict[Rat, bool] = {}

    def probe(guess: Rat) -> bool:
        guess = Fraction(guess)
        hit = cache.get(guess)
        if hit is not None:
            return hit
        ok = _decide_split(inst, guess)[0]
        cache[guess] = ok
        probes.append((guess, ok))
        return ok

    def finish(t_star: Rat, trace: JumpTrace) -> SearchResult:
        out = dual_split(inst, t_star)
        assert isinstance(out, Accepted), f"search landed on rejected guess {t_star}"
        return SearchResult(
            guess=t_star,
            schedule=out.schedule,
            lower_bound=t_star,
            makespan=out.schedule.makespan(),
            probes=probes,
            trace=trace,
        )

    smax = Fraction(inst.s_max)
    top = Fraction(2 * inst.total_load)
    if probe(smax):
        # nothing below s_max is ever accepted, so this is the exact optimum
        # of the search space
        trace = JumpTrace((smax, smax), (smax, smax), None, [], (smax, smax), ())
        return finish(smax, trace)

    # Bracket the answer between consecutive doubled setup values: inside,
    # the expensive/cheap split does not change.
    cands = [smax]
    cands += sorted({Fraction(2 * cl.setup) for cl in inst.classes if 2 * cl.setup > smax})
    cands.append(top)
    if not probe(top):
        raise AssertionError("dual rejected 2N; load certificate broken")
    lo, hi = _bisect_right_interval(cands, probe, 0, len(cands) - 1)
    low_end, high_end = cands[lo], cands[hi]

    expensive = tuple(i for i, cl in enumerate(inst.classes) if 2 * cl.setup >= high_end)
    x_lo, x_hi = low_end, high_end
    fastest: Optional[int] = None
    collected: list[tuple[int, Rat]] = []

    if expensive:
        fastest = min(expensive, key=lambda i: (-work[i], i))
        pf2 = Fraction(2 * work[fastest])
        d_hi = math.ceil(pf2 / high_end)  # largest candidate of f at or below B
        d_cap = d_hi + m
        # clip candidates 2P_f/d to the open bracket
        d_lo = d_hi
        while d_lo <= d_cap and pf2 / d_lo >= high_end:
            d_lo += 1
        d_top = d_cap if low_end <= 0 else min(d_cap, math.ceil(pf2 / low_end) - 1)
        if d_lo <= d_top:
            # virtual index d_lo-1 stands for B (accepted), d_top+1 for A (rejected)
            a_idx, r_idx = d_lo - 1, d_top + 1
            while r_idx - a_idx > 1:
                mid = (a_idx + r_idx) // 2
                if probe(pf2 / mid):
                    a_idx = mid
                else:
                    r_idx = mid
            x_hi = pf2 / a_idx if a_idx >= d_lo else high_end
            x_lo = pf2 / r_idx if r_idx <= d_top else low_end

        for i in expensive:
            d = math.ceil(Fraction(2 * work[i]) / x_hi)
            cand = Fraction(2 * work[i], d)
            if x_lo < cand < x_hi:
                collected.append((i, cand))

    chain = [x_lo] + sorted({t for _, t in collected}) + [x_hi]
    lo2, hi2 = _bisect_right_interval(chain, probe, 0, len(chain) - 1)
    t_fail, t_ok = chain[lo2], chain[hi2]

    # Between t_fail and t_ok no class jumps, so the required load is one
    # constant L: everything below L/m is rejected, everything at or above is
    # accepted (machine permitting).  Evaluate at the midpoint.
    mid = (t_fail + t_ok) / 2
    _, _, load_mid, machines_mid = _decide_split(inst, mid)
    if m < machines_mid:
        t_star = t_ok
    else:
        t_new = load_mid / m
        if t_new >= t_ok:
            t_star = t_ok
        else:
            assert t_new > t_fail, "load certificate inconsistent across the bracket"
            t_star = t_new
    trace = JumpTrace(
        setup_interval=(low_end, high_end),
        jump_interval=(x_lo, x_hi),
        fastest=fastest,
        jumps=collected,
        final_interval=(t_fail, t_ok),
        expensive=expensive,
    )
    return finish(t_star, trace)
