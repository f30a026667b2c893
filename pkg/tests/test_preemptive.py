import itertools
import random
from fractions import Fraction as F

import pytest

from batchsched.core import (
    Accepted,
    ContractError,
    Instance,
    JobClass,
    Rejected,
    Variant,
    machine_counts,
    verify_schedule,
)
from batchsched.oracle import exact_nonp, min_accepted_scan
from batchsched.preemptive import (
    KnapsackItem,
    _decide_nice_parts,
    _full_specs,
    _gamma_count,
    _nice_parts,
    _pmtn_plan,
    class_jump_pmtn,
    continuous_knapsack,
    dual_nice,
    dual_pmtn,
    dual_pmtn_packed,
)

from conftest import random_instance, tiny_instances


# -- continuous knapsack ----------------------------------------------------


def test_knapsack_example():
    items = [KnapsackItem(0, F(3), F(4)), KnapsackItem(1, F(2), F(2)), KnapsackItem(2, F(1), F(3))]
    sol = continuous_knapsack(items, F(5))
    assert sol.x == {1: F(1), 0: F(3, 4), 2: F(0)}
    assert sol.split_item == 0
    assert sol.value == F(17, 4)


def test_knapsack_unconstrained():
    items = [KnapsackItem(0, F(3), F(4)), KnapsackItem(1, F(2), F(2))]
    sol = continuous_knapsack(items, F(100))
    assert all(v == 1 for v in sol.x.values()) and sol.split_item is None


def test_knapsack_zero_capacity():
    items = [KnapsackItem(0, F(3), F(4))]
    sol = continuous_knapsack(items, F(0))
    assert sol.x == {0: F(0)} and sol.value == 0


def brute_force_lp(items, capacity):
    """Exact continuous optimum: some extreme solution has at most one
    fractional item, so try every integral subset plus one fractional top-up."""
    n = len(items)
    best = F(0)
    for mask in range(1 << n):
        w = sum((items[k].weight for k in range(n) if mask >> k & 1), F(0))
        if w > capacity:
            continue
        v = sum((items[k].profit for k in range(n) if mask >> k & 1), F(0))
        best = max(best, v)
        room = capacity - w
        for k in range(n):
            if not mask >> k & 1 and items[k].weight > 0:
                share = min(F(1), room / items[k].weight)
                best = max(best, v + share * items[k].profit)
    return best


def test_knapsack_matches_bruteforce():
    rng = random.Random(5)
    for _ in range(400):
        n = rng.randint(1, 8)
        items = [
            KnapsackItem(k, F(rng.randint(1, 9)), F(rng.randint(0, 9)))
            for k in range(n)
        ]
        cap = F(rng.randint(0, 25))
        sol = continuous_knapsack(items, cap)
        assert sol.value == brute_force_lp(items, cap)
        used = sum((items[k].weight * sol.x[k] for k in range(n)), F(0))
        assert used == min(cap, sum((it.weight for it in items), F(0)))
        fractional = [k for k, v in sol.x.items() if 0 < v < 1]
        assert len(fractional) <= 1


# -- nice instances -----------------------------------------------------------


NICE = Instance(m=4, classes=(JobClass(6, (8,)), JobClass(6, (1,)), JobClass(1, (2, 2))))


def test_nice_decision_formula_values():
    parts = _nice_parts(_full_specs(NICE, range(3)), F(10))
    ok, _, load, machines = _decide_nice_parts(parts, 4, F(10))
    assert load == 32 and machines == 3 and ok
    ok2, reason, _, _ = _decide_nice_parts(parts, 2, F(10))
    assert not ok2 and reason == "machines"


def test_nice_rejects_below_job_bound():
    # guess 10 passes the load check but the longest job cannot finish by
    # then: setup 6 + job 8 = 14 is a certified bound, so reject
    out = dual_nice(NICE, F(10))
    assert isinstance(out, Rejected) and out.reason == "job-bound"


def test_nice_accepts_and_builds_at_valid_guess():
    inst = Instance(m=3, classes=(JobClass(6, (5, 5)), JobClass(1, (2, 2))))
    out = dual_nice(inst, F(11))
    assert isinstance(out, Accepted)
    assert verify_schedule(inst, out.schedule, Variant.PREEMPTIVE, F(33, 2)).ok
    out2 = dual_nice(inst, F(11), style="gamma")
    assert isinstance(out2, Accepted)
    assert verify_schedule(inst, out2.schedule, Variant.PREEMPTIVE, F(33, 2)).ok


def test_nice_contract_error_when_not_nice():
    inst = Instance(m=2, classes=(JobClass(5, (2,)), JobClass(1, (4,))))
    with pytest.raises(ContractError):
        dual_nice(inst, F(8))  # class 0 sits strictly between 3/4 T and T


def test_all_cheap_degenerate_wrap():
    inst = Instance(m=3, classes=(JobClass(1, (2, 2)), JobClass(2, (1,))))
    out = dual_nice(inst, F(4))
    assert isinstance(out, Accepted)
    assert verify_schedule(inst, out.schedule, Variant.PREEMPTIVE, F(6)).ok


# -- general dual -------------------------------------------------------------


def test_pmtn_accepts_case_without_knapsack():
    inst = Instance(m=2, classes=(JobClass(5, (2,)), JobClass(1, (4,))))
    out = dual_pmtn(inst, F(8))
    assert isinstance(out, Accepted)
    rep = verify_schedule(inst, out.schedule, Variant.PREEMPTIVE, F(12))
    assert rep.ok and rep.makespan <= 12


def test_pmtn_reject_example():
    inst = Instance(m=2, classes=(JobClass(5, (2,)), JobClass(1, (4, 4, 4))))
    out = dual_pmtn(inst, F(8))
    assert isinstance(out, Rejected) and out.reason == "load"


def test_pmtn_defers_to_nice_when_nice():
    inst = Instance(m=3, classes=(JobClass(6, (5, 5)), JobClass(1, (2, 2))))
    a = dual_pmtn(inst, F(11))
    b = dual_nice(inst, F(11))
    assert isinstance(a, Accepted) and isinstance(b, Accepted)
    assert a.schedule.machines == b.schedule.machines


def test_pmtn_knapsack_case_with_rejected_class():
    # five dedicated machines; the knapsack selects the dense oversized-job
    # class, rejects the other (share 0), whose job head then parks at a
    # dedicated-machine bottom while the plain small class wraps below a
    # quarter of the guess
    inst = Instance(
        m=6,
        classes=(
            JobClass(21, (10,)),
            JobClass(21, (10,)),
            JobClass(21, (10,)),
            JobClass(21, (10,)),
            JobClass(21, (10,)),
            JobClass(9, (12,)),  # selected outright
            JobClass(1, (25,)),  # share 0: head goes to a bottom
            JobClass(10, (2,)),
            JobClass(2, (5, 5, 5)),  # wrapped into the bottoms
        ),
    )
    plan = _pmtn_plan(inst, F(40))
    assert plan.case_a and plan.knapsack.x == {5: F(1), 6: F(0)}
    for style in ("alpha", "gamma"):
        out = dual_pmtn(inst, F(40), style=style)
        assert isinstance(out, Accepted)
        assert verify_schedule(inst, out.schedule, Variant.PREEMPTIVE, F(60)).ok


def test_pmtn_greedy_case_with_straddler():
    # enough free time for every oversized-job class, but the last small
    # class is cut between the regular machines and the bottoms
    inst = Instance(
        m=4,
        classes=(
            JobClass(21, (10,)),
            JobClass(21, (10,)),
            JobClass(9, (12,)),
            JobClass(2, (5, 5)),
            JobClass(3, (4, 4)),  # straddles
            JobClass(10, (28,)),
        ),
    )
    plan = _pmtn_plan(inst, F(40))
    assert not plan.nice and not plan.case_a
    for style in ("alpha", "gamma"):
        out = dual_pmtn(inst, F(40), style=style)
        assert isinstance(out, Accepted)
        assert verify_schedule(inst, out.schedule, Variant.PREEMPTIVE, F(60)).ok


def test_pmtn_knapsack_split_item_case():
    # random-found shape where the knapsack splits one class fractionally
    inst = Instance(
        m=8,
        classes=(
            JobClass(39, (25,)),
            JobClass(29, (19, 23, 19, 23)),
            JobClass(26, (21, 1, 32, 25)),
            JobClass(29, (12, 35, 20)),
            JobClass(10, (37, 25, 38, 15)),
            JobClass(6, (21, 39, 16)),
        ),
    )
    guess = F(585, 8)
    plan = _pmtn_plan(inst, guess)
    assert plan.case_a and plan.split_cls == 5
    for style in ("alpha", "gamma"):
        out = dual_pmtn(inst, guess, style=style)
        assert isinstance(out, Accepted)
        assert verify_schedule(inst, out.schedule, Variant.PREEMPTIVE, F(3, 2) * guess).ok


def test_pmtn_trivial_when_machines_cover_jobs():
    inst = Instance(m=2, classes=(JobClass(5, (2,)), JobClass(1, (4,))))
    out = dual_pmtn(inst, F(8))
    assert isinstance(out, Accepted)
    assert out.schedule.makespan() == 7  # one job per machine is optimal


def test_pmtn_accepts_above_exact_nonpreemptive_optimum():
    # a non-preemptive schedule is preemptive-feasible, so the dual must
    # accept any guess at or above the exhaustive non-preemptive optimum
    for inst in tiny_instances(400, seed=77):
        opt = exact_nonp(inst)
        for guess in (F(opt), F(opt) + 1, F(2 * opt)):
            for style in ("alpha", "gamma"):
                out = dual_pmtn(inst, guess, style=style)
                assert isinstance(out, Accepted), (inst, guess, style)
                rep = verify_schedule(
                    inst, out.schedule, Variant.PREEMPTIVE, F(3, 2) * guess
                )
                assert rep.ok, (inst, guess, style, [str(v) for v in rep.violations][:4])


# -- class jumping ------------------------------------------------------------


def test_gamma_jump_arithmetic():
    # with 2 half-gap machines a class with setup 6 and work 10 reshapes at
    # 2*16/4 = 8; the next reshape is at 2*16/5 = 6.4
    assert F(2 * 16, 4) == 8 and F(2 * 16, 5) == F(32, 5)
    inst = Instance(m=4, classes=(JobClass(6, (10,)),))
    assert machine_counts(inst, 0, F(8)).gamma == 2
    assert machine_counts(inst, 0, F(8) + F(1, 100)).gamma == 2
    assert machine_counts(inst, 0, F(8) - F(1, 100)).gamma == 3
    assert _gamma_count(6, 10, F(8)) == 2


def test_class_jump_single_class_scan_agreement():
    inst = Instance(m=2, classes=(JobClass(6, (5, 5)),))
    r = class_jump_pmtn(inst)
    scan = min_accepted_scan(inst, Variant.PREEMPTIVE)
    assert r.guess <= scan and r.makespan <= F(3, 2) * scan
    assert isinstance(dual_pmtn_packed(inst, r.guess), Accepted)
    assert verify_schedule(inst, r.schedule, Variant.PREEMPTIVE, F(3, 2) * r.guess).ok


def test_class_jump_accept_first_short_circuit():
    inst = Instance(m=2, classes=(JobClass(1, (2, 2)), JobClass(1, (3,))))
    r = class_jump_pmtn(inst)
    # T_min accepted immediately: exactly one probe, optimal certificate
    assert len(r.probes) == 1 and r.probes[0][1]
    assert r.guess == r.lower_bound


def test_class_jump_random_scan_agreement():
    rng = random.Random(31337)
    for _ in range(80):
        inst = random_instance(rng, max_m=5, max_c=5, max_jobs=4, max_val=20)
        r = class_jump_pmtn(inst)
        assert not getattr(r.trace, "fallback", False)
        scan = min_accepted_scan(inst, Variant.PREEMPTIVE)
        assert r.guess <= scan
        assert r.makespan <= F(3, 2) * scan
        assert verify_schedule(inst, r.schedule, Variant.PREEMPTIVE, F(3, 2) * r.guess).ok
