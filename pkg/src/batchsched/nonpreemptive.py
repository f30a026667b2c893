"""Non-preemptive scheduling: every job runs contiguously on one machine.

The 3/2-dual first places all jobs too big to share a machine (wrapping them
preemptively), fills the opened machines with same-class jobs, distributes
the remainder greedily, and finally repairs the schedule: split jobs are
swapped back for their whole parents and items sticking out over the guess
move on to the next machine behind a fresh setup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import (
    PIECE,
    SETUP,
    Accepted,
    ContractError,
    DualOutcome,
    Instance,
    JobRef,
    Placement,
    Rat,
    Rejected,
    Schedule,
    Variant,
    lower_bound_tmin,
    trivial_one_job_per_machine,
)
from .search import SearchResult


def _job_setup_bound(inst: Instance) -> int:
    """max(s_i + longest job of class i): no schedule of the non-splittable
    variants beats this."""
    return max(cl.setup + cl.t_max for cl in inst.classes)


# ---------------------------------------------------------------------------
# Machine stacks: items packed back-to-back from time 0
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class _Item:
    kind: str  # SETUP or PIECE
    cls: int
    dur: Rat
    ref: Optional[JobRef] = None
    seq: int = 0  # creation order, identifies the first piece of a split
    step3: bool = False
    crossed: bool = False


class _Stacks:
    def __init__(self, m: int):
        self.m = m
        self.stacks: list[list[_Item]] = []
        self.loads: list[Rat] = []
        self._seq = 0

    def new_machine(self) -> int:
        if len(self.stacks) >= self.m:
            raise ContractError("construction ran out of machines")
        self.stacks.append([])
        self.loads.append(Fraction(0))
        return len(self.stacks) - 1

    def _push(self, u: int, it: _Item) -> _Item:
        self._seq += 1
        it.seq = self._seq
        self.stacks[u].append(it)
        self.loads[u] += it.dur
        return it

    def push_setup(self, u: int, cls: int, dur: Rat, step3=False) -> _Item:
        return self._push(u, _Item(SETUP, cls, dur, step3=step3))

    def push_piece(self, u: int, cls: int, ref: JobRef, dur: Rat, step3=False) -> _Item:
        return self._push(u, _Item(PIECE, cls, dur, ref=ref, step3=step3))

    def insert(self, u: int, index: int, it: _Item):
        self.stacks[u].insert(index, it)
        self.loads[u] += it.dur

    def pop(self, u: int) -> _Item:
        it = self.stacks[u].pop()
        self.loads[u] -= it.dur
        return it

    def remove(self, u: int, it: _Item):
        self.stacks[u].remove(it)  # identity comparison: _Item has eq=False
        self.loads[u] -= it.dur

    def to_schedule(self) -> Schedule:
        machines: list[list[Placement]] = []
        piece_counter: dict[JobRef, int] = {}
        for stack in self.stacks:
            t = Fraction(0)
            row = []
            for it in stack:
                if it.kind == SETUP:
                    row.append(Placement(SETUP, it.cls, t, it.dur))
                else:
                    k = piece_counter.get(it.ref, 0)
                    piece_counter[it.ref] = k + 1
                    row.append(Placement(PIECE, it.cls, t, it.dur, job=it.ref[1], piece=k))
                t += it.dur
            machines.append(row)
        return Schedule(m=self.m, machines=machines)


def _stack_wrap(st: _Stacks, cls: int, setup: int, items, cap: Rat) -> list[int]:
    """Fill machines [setup, pieces...] up to exactly cap, cutting jobs at the
    border; returns the used machine ids in order."""
    used = [st.new_machine()]
    st.push_setup(used[-1], cls, Fraction(setup))
    for ref, dur in items:
        dur = Fraction(dur)
        while st.loads[used[-1]] + dur > cap:
            head = cap - st.loads[used[-1]]
            if head > 0:
                st.push_piece(used[-1], cls, ref, head)
                dur -= head
            used.append(st.new_machine())
            st.push_setup(used[-1], cls, Fraction(setup))
        if dur > 0:
            st.push_piece(used[-1], cls, ref, dur)
    return used


# ---------------------------------------------------------------------------
# 2-approximation: next fit with threshold + border repair
# ---------------------------------------------------------------------------


def next_fit_two_approx(inst: Instance, variant: Variant) -> tuple[Schedule, Rat]:
    """Linear-time schedule with makespan at most twice the instance lower
    bound, feasible without preemption (hence for the preemptive variant too).
    """
    if variant is Variant.SPLITTABLE:
        raise ContractError("next-fit two-approximation covers pmtn and nonp only")
    if inst.m >= inst.n:
        sched = trivial_one_job_per_machine(inst)
        return sched, sched.makespan()
    tmin = lower_bound_tmin(inst, variant)
    st = _Stacks(inst.m)
    cur = st.new_machine()
    trigger: dict[int, _Item] = {}  # machine -> the item that pushed it past tmin
    for i, cl in enumerate(inst.classes):
        items = [(SETUP, None, Fraction(cl.setup))]
        items += [(PIECE, (i, j), Fraction(t)) for j, t in enumerate(cl.jobs)]
        for kind, ref, dur in items:
            if kind == SETUP:
                it = st.push_setup(cur, i, dur)
            else:
                it = st.push_piece(cur, i, ref, dur)
            if st.loads[cur] > tmin:
                trigger[cur] = it
                cur = st.new_machine()
    # Move each over-the-line item to the start of the next machine; moved
    # jobs get a fresh setup in front.
    for u in range(len(st.stacks) - 1):
        it = trigger.get(u)
        if it is None:
            continue
        assert st.stacks[u] and st.stacks[u][-1] is it
        st.pop(u)
        if it.kind == PIECE:
            st.insert(u + 1, 0, _Item(SETUP, it.cls, Fraction(inst.classes[it.cls].setup)))
            st.insert(u + 1, 1, it)
        else:
            st.insert(u + 1, 0, it)
    # Trailing setups serve no job: drop them.
    for u in range(len(st.stacks)):
        while st.stacks[u] and st.stacks[u][-1].kind == SETUP:
            st.pop(u)
    st.stacks = [s for s in st.stacks if s]
    sched = st.to_schedule()
    makespan = sched.makespan()
    assert makespan <= 2 * tmin
    return sched, makespan


# ---------------------------------------------------------------------------
# Counts for the dual decision
# ---------------------------------------------------------------------------


@dataclass
class NonpCounts:
    """Per-class machine minima and leftovers at a guess T.

    machines[i]  least machines any T-feasible schedule opens for class i
    leftover[i]  x_i = P(C_i) - machines[i] * (T - s_i): work that cannot fit
                 on those machines (forces an extra setup when positive)
    big_jobs     refs with t_j > T/2
    forced       refs of cheap classes with t_j <= T/2 but s_i + t_j > T/2
    solo         all jobs that cannot share a machine with another solo job
    blocked      True when some class has T <= s_i (guaranteed reject)
    """

    guess: Rat
    machines: list[int]
    leftover: list[Rat]
    big_jobs: list[JobRef]
    forced: list[JobRef]
    solo: list[JobRef]
    blocked: bool = False


def counts_nonp(inst: Instance, guess: Rat) -> NonpCounts:
    # integer comparisons against guess p/q: x > guess/2 iff 2 x q > p
    p_, q_ = guess.numerator, guess.denominator
    machines: list[int] = []
    leftover: list[Rat] = []
    big: list[JobRef] = []
    forced: list[JobRef] = []
    solo: list[JobRef] = []
    blocked = False
    for i, cl in enumerate(inst.classes):
        if 2 * cl.setup * q_ > p_:
            if p_ <= cl.setup * q_:
                blocked = True
                machines.append(0)
                leftover.append(Fraction(0))
                continue
            mi = math.ceil(Fraction(cl.total) / (guess - cl.setup))
            solo += [(i, j) for j in range(len(cl.jobs))]
        else:
            kw = 0
            nbig = 0
            sq2 = 2 * cl.setup * q_
            for j, t in enumerate(cl.jobs):
                if 2 * t * q_ > p_:
                    nbig += 1
                    big.append((i, j))
                    solo.append((i, j))
                elif sq2 + 2 * t * q_ > p_:
                    kw += t
                    forced.append((i, j))
                    solo.append((i, j))
            mi = nbig + (math.ceil(Fraction(kw) / (guess - cl.setup)) if kw else 0)
        machines.append(mi)
        leftover.append(Fraction(cl.total) - mi * (guess - cl.setup))
    return NonpCounts(
        guess=guess,
        machines=machines,
        leftover=leftover,
        big_jobs=big,
        forced=forced,
        solo=solo,
        blocked=blocked,
    )


def _decide_nonp(inst: Instance, guess: Rat):
    """(accepted, reason, counts) without building a schedule."""
    if guess <= 0:
        return False, "load", None
    if inst.m >= inst.n:
        if guess >= _job_setup_bound(inst):
            return True, "", None
        return False, "job-bound", None
    if guess < _job_setup_bound(inst):
        return False, "job-bound", None
    counts = counts_nonp(inst, guess)
    assert not counts.blocked  # job-setup bound implies T > s_i for all i
    need = sum(counts.machines)
    if inst.m < need:
        return False, "machines", counts
    load = Fraction(inst.total_work)
    for i, cl in enumerate(inst.classes):
        load += counts.machines[i] * cl.setup
        if counts.leftover[i] > 0:
            load += cl.setup
    if inst.m * guess < load:
        return False, "load", counts
    return True, "", counts


def dual_nonp(inst: Instance, guess: Rat) -> DualOutcome:
    """Either a non-preemptive schedule with makespan <= (3/2)*guess or a
    certificate that guess < OPT."""
    ok, reason, counts = _decide_nonp(inst, guess)
    if not ok:
        return Rejected(guess, reason)
    if inst.m >= inst.n:
        return Accepted(trivial_one_job_per_machine(inst), guess)
    return Accepted(_build_nonp(inst, guess, counts), guess)


def _build_nonp(inst: Instance, guess: Rat, counts: NonpCounts) -> Schedule:
    half = guess / 2
    st = _Stacks(inst.m)
    solo = set(counts.solo)
    fill_targets: dict[int, list[int]] = {}

    # Step 1: jobs that cannot share a machine.  Expensive classes wrap over
    # their machine minimum; each big cheap job opens its own machine; the
    # remaining forced cheap jobs wrap class by class.
    forced_by_cls: dict[int, list[tuple[JobRef, Rat]]] = {}
    for ref in counts.forced:
        forced_by_cls.setdefault(ref[0], []).append((ref, Fraction(inst.duration(ref))))
    for i, cl in enumerate(inst.classes):
        targets: list[int] = []
        if cl.setup > half:
            items = [((i, j), Fraction(t)) for j, t in enumerate(cl.jobs)]
            used = _stack_wrap(st, i, cl.setup, items, guess)
            targets = [used[-1]]
        else:
            for i2, j in counts.big_jobs:
                if i2 != i:
                    continue
                u = st.new_machine()
                st.push_setup(u, i, Fraction(cl.setup))
                st.push_piece(u, i, (i, j), Fraction(cl.jobs[j]))
                targets.append(u)
            if i in forced_by_cls:
                used = _stack_wrap(st, i, cl.setup, forced_by_cls[i], guess)
                targets.append(used[-1])
        fill_targets[i] = targets

    # Step 2: top the opened machines of each cheap class up to the guess with
    # its remaining jobs, cutting at the border.
    residual: dict[int, list[tuple[JobRef, Rat]]] = {}
    for i, cl in enumerate(inst.classes):
        if cl.setup > half:
            continue
        rest = [((i, j), Fraction(t)) for j, t in enumerate(cl.jobs) if (i, j) not in solo]
        out: list[tuple[JobRef, Rat]] = []
        targets = fill_targets[i]
        ti = 0
        for ref, dur in rest:
            while dur > 0 and ti < len(targets):
                u = targets[ti]
                room = guess - st.loads[u]
                if room <= 0:
                    ti += 1
                    continue
                take = min(room, dur)
                st.push_piece(u, i, ref, take)
                dur -= take
            if dur > 0:
                out.append((ref, dur))
        if out:
            residual[i] = out
        want = max(counts.leftover[i], Fraction(0))
        got = sum((d for _, d in out), Fraction(0))
        assert got == want, f"residual work {got} != leftover bound {want}"

    # Step 3: one fresh setup per class with residual work, then greedy over
    # machines below the guess (opened ones first, then fresh), keeping items
    # whole even when they stick out.
    order: list[int] = []
    if residual:
        seq: list[tuple[str, int, Optional[JobRef], Rat]] = []
        for i in sorted(residual):
            seq.append((SETUP, i, None, Fraction(inst.classes[i].setup)))
            for ref, dur in residual[i]:
                seq.append((PIECE, i, ref, dur))
        avail = [u for u in range(len(st.stacks)) if st.loads[u] < guess]
        pos = 0

        def advance() -> int:
            nonlocal pos
            while pos < len(avail):
                u2 = avail[pos]
                if st.loads[u2] < guess:
                    return u2
                pos += 1
            return st.new_machine()

        u = advance()
        for kind, i, ref, dur in seq:
            if st.loads[u] >= guess:
                u = advance()
            if kind == SETUP:
                it = st.push_setup(u, i, dur, step3=True)
            else:
                it = st.push_piece(u, i, ref, dur, step3=True)
            if not order or order[-1] != u:
                order.append(u)
            if st.loads[u] > guess:
                it.crossed = True  # stays whole; the greedy just moves on

    _repair(inst, st, order, guess)
    return st.to_schedule()


def _repair(inst: Instance, st: _Stacks, order: list[int], guess: Rat):
    """Step 4: make the schedule non-preemptive, then fix loads and setups."""
    # Pieces per job; a job in more than one piece was split in step 1 or 2
    # (or its tail travelled through step 3).
    pieces: dict[JobRef, list[tuple[int, _Item]]] = {}
    for u, stack in enumerate(st.stacks):
        for it in stack:
            if it.kind == PIECE:
                pieces.setdefault(it.ref, []).append((u, it))
    for u in range(len(st.stacks)):
        stack = st.stacks[u]
        if not stack:
            continue
        last = stack[-1]
        if last.kind != PIECE:
            continue
        family = pieces.get(last.ref, [])
        if len(family) < 2:
            continue
        if last.seq != min(it.seq for _, it in family):
            continue  # only the first piece is swapped for its whole parent
        grow = Fraction(inst.duration(last.ref)) - last.dur
        last.dur = Fraction(inst.duration(last.ref))
        st.loads[u] += grow
        for v, other in family:
            if other is not last:
                st.remove(v, other)
        pieces[last.ref] = [(u, last)]

    # Items recorded as crossing the guess move to the next machine of the
    # greedy order (fresh setup in front of moved jobs); a class whose jobs
    # continue on the next machine without a crossing predecessor gets a
    # setup inserted below the continuation.
    carry: Optional[_Item] = None
    for idx, u in enumerate(order):
        stack = st.stacks[u]
        ins = next((k for k, it in enumerate(stack) if it.step3), len(stack))
        if carry is not None:
            if carry.kind == PIECE:
                st.insert(u, ins, _Item(SETUP, carry.cls, Fraction(inst.classes[carry.cls].setup)))
                st.insert(u, ins + 1, carry)
            else:
                st.insert(u, ins, carry)
            carry = None
        elif ins < len(stack) and stack[ins].kind == PIECE:
            covered = ins > 0 and stack[ins - 1].cls == stack[ins].cls
            if not covered:
                st.insert(
                    u, ins, _Item(SETUP, stack[ins].cls, Fraction(inst.classes[stack[ins].cls].setup))
                )
        if stack and stack[-1].crossed:
            it = st.pop(u)
            it.crossed = False
            if idx < len(order) - 1:
                carry = it
            else:
                # no successor in the greedy order: park the item on an empty
                # machine, or on any other machine still at or below the guess
                target = None
                if len(st.stacks) < st.m:
                    target = st.new_machine()
                else:
                    for v in range(len(st.stacks)):
                        if v != u and st.loads[v] <= guess:
                            target = v
                            break
                if target is None:
                    raise ContractError("repair found no machine for the final item")
                if it.kind == PIECE:
                    st.push_setup(target, it.cls, Fraction(inst.classes[it.cls].setup))
                st._push(target, it)
    assert carry is None


def exact_integer_search_nonp(inst: Instance) -> SearchResult:
    """Smallest integer guess the dual accepts, by binary search over
    [ceil(T_min), ceil(2*T_min)].  The optimum is integral, so the returned
    guess is a certified lower bound on it and the schedule is within 3/2."""
    if inst.m >= inst.n:
        sched = trivial_one_job_per_machine(inst)
        best = Fraction(_job_setup_bound(inst))
        return SearchResult(
            guess=best, schedule=sched, lower_bound=best, makespan=sched.makespan(), probes=[]
        )
    tmin = lower_bound_tmin(inst, Variant.NONPREEMPTIVE)
    probes: list[tuple[Rat, bool]] = []

    def probe(k: int) -> bool:
        ok = _decide_nonp(inst, Fraction(k))[0]
        probes.append((Fraction(k), ok))
        return ok

    lo = math.ceil(tmin) - 1  # below T_min: certified rejected without a probe
    hi = math.ceil(2 * tmin)
    if not probe(hi):
        raise ContractError(f"dual rejected ceil(2*T_min) = {hi}")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if probe(mid):
            hi = mid
        else:
            lo = mid
    out = dual_nonp(inst, Fraction(hi))
    assert isinstance(out, Accepted)
    return SearchResult(
        guess=Fraction(hi),
        schedule=out.schedule,
        lower_bound=Fraction(hi),  # all smaller integers rejected or under T_min
        makespan=out.schedule.makespan(),
        probes=probes,
    )
