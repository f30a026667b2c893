"""Scheduling n jobs of c classes on m identical machines with batch setup
times: splittable, preemptive and non-preemptive variants, with linear-time
2-approximations, 3/2-dual decision procedures, (3/2+eps) bisection, exact
3/2 jump searches, a feasibility verifier, certified lower bounds and a
brute-force oracle for small instances."""

from .core import (
    Accepted,
    CapacityError,
    ClassPartition,
    ContractError,
    DualOutcome,
    Instance,
    JobClass,
    MachineCounts,
    Placement,
    Rat,
    Rejected,
    Schedule,
    ValidationError,
    Variant,
    VerifyReport,
    Violation,
    classify,
    counts_for,
    emit_instance,
    lower_bound_tmin,
    machine_counts,
    parse_instance,
    trivial_one_job_per_machine,
    verify_schedule,
)
from .nonpreemptive import (
    NonpCounts,
    counts_nonp,
    dual_nonp,
    exact_integer_search_nonp,
    next_fit_two_approx,
)
from .oracle import exact_nonp, min_accepted_scan
from .preemptive import (
    KnapsackItem,
    KnapsackSolution,
    class_jump_pmtn,
    continuous_knapsack,
    dual_nice,
    dual_pmtn,
    dual_pmtn_packed,
)
from .search import CertifiedReport, SearchResult, certified_report, epsilon_search
from .splittable import class_jump_split, dual_split, two_approx_split
from .wrap import (
    Batch,
    Gap,
    WrapSequence,
    WrapTemplate,
    sequence_load,
    split,
    template_capacity,
    wrap,
    wrap_parallel_compressed,
)

__version__ = "0.1.0"
