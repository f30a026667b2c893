"""Batch wrapping: pour a sequence of setup-prefixed batches into time gaps.

A wrap template is a list of free time gaps, at most one per machine, with
strictly increasing machine ids.  A wrap sequence is a list of batches, each
a class setup followed by jobs or job pieces of that class.  Wrapping places
the sequence left-to-right through the gaps: a setup that would cross the end
of a gap moves below the start of the next gap, a job that would cross is cut
there and continues at the start of the next gap behind a freshly inserted
setup of its class.

Templates whose tail consists of many identical parallel gaps can be wrapped
in compressed form: runs of gaps that carry the same content (the middle gaps
of one long job) are emitted once with a multiplicity, so the output size is
bounded by the sequence length, independent of the gap count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .core import PIECE, SETUP, CapacityError, JobRef, Placement, Rat, Schedule


@dataclass(frozen=True)
class Gap:
    machine: int
    open: Rat
    close: Rat

    def __post_init__(self):
        if not (0 <= self.open < self.close):
            raise ValueError(f"gap needs 0 <= open < close, got ({self.open}, {self.close})")

    @property
    def height(self) -> Rat:
        return self.close - self.open


@dataclass(frozen=True)
class Batch:
    """A setup followed by (job reference, duration) items of one class."""

    cls: int
    setup: Rat
    jobs: tuple[tuple[JobRef, Rat], ...]

    @property
    def load(self) -> Rat:
        return self.setup + sum(d for _, d in self.jobs)


WrapTemplate = list[Gap]
WrapSequence = list[Batch]


def template_capacity(gaps: WrapTemplate) -> Rat:
    return sum((g.height for g in gaps), Fraction(0))


def sequence_load(seq: WrapSequence) -> Rat:
    return sum((b.load for b in seq), Fraction(0))


def check_template(gaps: WrapTemplate):
    for g1, g2 in zip(gaps, gaps[1:]):
        if g2.machine <= g1.machine:
            raise ValueError("template machines must be strictly increasing")


class Builder:
    """Accumulates placements on virtual machine ids, then renumbers them.

    Explicit machines keep their relative order and are packed to 0..E-1;
    compressed configurations follow, occupying the next sum-of-multiplicities
    machine slots.  Piece ids are assigned per job in creation order.
    """

    def __init__(self, m: int):
        self.m = m
        self._machines: dict[int, list[Placement]] = {}
        self._configs: list[tuple[int, tuple[Placement, ...], int]] = []
        self._piece_counter: dict[JobRef, int] = {}

    def _next_piece(self, ref: JobRef) -> int:
        k = self._piece_counter.get(ref, 0)
        self._piece_counter[ref] = k + 1
        return k

    def row(self, machine: int) -> list[Placement]:
        return self._machines.setdefault(machine, [])

    def pop_row(self, machine: int) -> list[Placement]:
        return self._machines.pop(machine)

    def put_setup(self, machine: int, cls: int, start: Rat, dur: Rat):
        self.row(machine).append(Placement(SETUP, cls, start, dur))

    def put_piece(self, machine: int, cls: int, ref: JobRef, start: Rat, dur: Rat):
        self.row(machine).append(
            Placement(PIECE, cls, start, dur, job=ref[1], piece=self._next_piece(ref))
        )

    def make_setup(self, cls: int, start: Rat, dur: Rat) -> Placement:
        return Placement(SETUP, cls, start, dur)

    def make_piece(self, cls: int, ref: JobRef, start: Rat, dur: Rat) -> Placement:
        return Placement(PIECE, cls, start, dur, job=ref[1], piece=self._next_piece(ref))

    def put_config(self, base_machine: int, placements: tuple[Placement, ...], mult: int):
        if mult > 0 and placements:
            self._configs.append((base_machine, placements, mult))

    def finalize(self) -> Schedule:
        explicit = [self._machines[k] for k in sorted(self._machines)]
        configs = [(pl, mult) for _, pl, mult in sorted(self._configs, key=lambda e: e[0])]
        return Schedule(m=self.m, machines=explicit, compressed=configs)


@dataclass
class WrapResult:
    fills: list[tuple[int, Rat]]  # (virtual machine id, fill end time) per used gap
    last_machine: int  # virtual id of the gap holding the final item
    last_fill: Rat  # end time of the content on that machine
    placed: int  # number of emitted placements (configs count once)


class _Run:
    """State of one wrapping pass over explicit gaps plus a parallel tail."""

    def __init__(
        self,
        builder: Builder,
        explicit: WrapTemplate,
        tail_gap: Optional[tuple[Rat, Rat]],
        tail_count: int,
        tail_base: int,
        materialize_last: bool,
        setups_below: bool = False,
    ):
        self.setups_below = setups_below
        check_template(explicit)
        if explicit and tail_gap is not None and tail_count > 0:
            if tail_base <= explicit[-1].machine:
                raise ValueError("tail machines must follow the explicit machines")
        if tail_gap is not None and not (0 <= tail_gap[0] < tail_gap[1]):
            raise ValueError("tail gap needs 0 <= open < close")
        self.b = builder
        self.explicit = explicit
        self.tail_gap = tail_gap
        self.tail_count = tail_count if tail_gap is not None else 0
        self.tail_base = tail_base
        self.materialize_last = materialize_last
        self.total = len(explicit) + self.tail_count
        if self.total == 0:
            raise CapacityError("empty wrap template")
        self.pos = 0
        self.cfg: Optional[list[Placement]] = None
        self.fills: list[tuple[int, Rat]] = []
        self.placed = 0
        self.open: Rat = self._open(0)
        self.close: Rat = self._close(0)
        self.t: Rat = self.open

    # -- gap geometry ------------------------------------------------------

    def _in_tail(self, pos: int) -> bool:
        return pos >= len(self.explicit)

    def _open(self, pos: int) -> Rat:
        if self._in_tail(pos):
            return self.tail_gap[0]
        return self.explicit[pos].open

    def _close(self, pos: int) -> Rat:
        if self._in_tail(pos):
            return self.tail_gap[1]
        return self.explicit[pos].close

    def _machine(self, pos: int) -> int:
        if self._in_tail(pos):
            return self.tail_base + (pos - len(self.explicit))
        return self.explicit[pos].machine

    def _sync(self):
        self.open = self._open(self.pos)
        self.close = self._close(self.pos)

    # -- emission ----------------------------------------------------------

    def put_setup(self, cls: int, start: Rat, dur: Rat):
        self.placed += 1
        if self._in_tail(self.pos):
            if self.cfg is None:
                self.cfg = []
            self.cfg.append(self.b.make_setup(cls, start, dur))
        else:
            self.b.put_setup(self._machine(self.pos), cls, start, dur)

    def put_piece(self, cls: int, ref: JobRef, start: Rat, dur: Rat):
        self.placed += 1
        if self._in_tail(self.pos):
            if self.cfg is None:
                self.cfg = []
            self.cfg.append(self.b.make_piece(cls, ref, start, dur))
        else:
            self.b.put_piece(self._machine(self.pos), cls, ref, start, dur)

    def _flush_cfg(self, final: bool = False):
        if self.cfg is None:
            return
        machine = self._machine(self.pos)
        if final and self.materialize_last:
            for p in self.cfg:
                self.b.row(machine).append(p)
        else:
            self.b.put_config(machine, tuple(self.cfg), 1)
        self.cfg = None

    # -- movement ----------------------------------------------------------

    def next_gap(self):
        if self._in_tail(self.pos):
            self._flush_cfg()
        self.fills.append((self._machine(self.pos), self.t))
        if self.pos + 1 >= self.total:
            raise CapacityError("wrap sequence exceeds template capacity")
        self.pos += 1
        self._sync()
        self.t = self.open

    def bulk_full_gaps(self, cls: int, setup: Rat, ref: JobRef, count: int):
        """Emit `count` identical tail gaps fully covered by one job: a setup
        ending at the gap start plus a full-height piece, as one config."""
        assert self._in_tail(self.pos + 1) and count >= 1
        self._flush_cfg()
        self.fills.append((self._machine(self.pos), self.t))
        a, b = self.tail_gap
        cfg = (
            self.b.make_setup(cls, a - setup, setup),
            self.b.make_piece(cls, ref, a, b - a),
        )
        self.placed += 2
        if self.pos + count >= self.total:
            raise CapacityError("wrap sequence exceeds template capacity")
        self.b.put_config(self._machine(self.pos + 1), cfg, count)
        for k in range(count - 1):
            self.fills.append((self._machine(self.pos + 1 + k), b))
        self.pos += count
        self._sync()
        self.t = b  # gap is exactly full; next item immediately crosses

    def finish(self) -> WrapResult:
        if self._in_tail(self.pos):
            self._flush_cfg(final=True)
        self.fills.append((self._machine(self.pos), self.t))
        return WrapResult(
            fills=self.fills,
            last_machine=self._machine(self.pos),
            last_fill=self.t,
            placed=self.placed,
        )


def _place_item(run: _Run, cls: int, setup: Rat, ref: JobRef, dur: Rat):
    """Place one job (piece), cutting it at gap ends as often as needed."""
    end = run.t + dur
    while end > run.close:
        head = run.close - run.t
        if head > 0:
            run.put_piece(cls, ref, run.t, head)
        rest = end - run.close
        # Fast path: the remainder spans whole identical tail gaps.
        if run.tail_count and run._in_tail(run.pos + 1):
            height = run.tail_gap[1] - run.tail_gap[0]
            if rest > height:
                full = math.ceil(rest / height) - 1
                avail = run.total - run.pos - 2  # keep one gap for the final piece
                full = min(full, max(avail, 0))
                if full >= 1:
                    run.bulk_full_gaps(cls, setup, ref, full)
                    rest -= height * full
                    end = run.t + rest  # run.t == close of the bulk gaps
                    continue
        run.next_gap()
        run.put_setup(cls, run.open - setup, setup)
        run.t = run.open
        end = run.t + rest
    if end > run.t:
        run.put_piece(cls, ref, run.t, end - run.t)
    run.t = end


def _place_batch(run: _Run, batch: Batch):
    if (
        run.setups_below
        and run.t == run.open
        and run.t + batch.setup <= run.close
    ):
        # the caller reserved room under every gap: a setup opening a gap
        # anchors below it, exactly where it would land after relocating
        # across a preceding gap that shrank to nothing, so the layout is a
        # continuous function of the guess
        run.put_setup(batch.cls, run.open - batch.setup, batch.setup)
    elif run.t + batch.setup > run.close:
        run.next_gap()
        run.put_setup(batch.cls, run.open - batch.setup, batch.setup)
        run.t = run.open
    else:
        run.put_setup(batch.cls, run.t, batch.setup)
        run.t = run.t + batch.setup
    for ref, dur in batch.jobs:
        if dur <= 0:
            raise ValueError(f"job piece {ref} with non-positive duration {dur}")
        _place_item(run, batch.cls, batch.setup, ref, dur)


def run_wrap(
    builder: Builder,
    seq: WrapSequence,
    explicit: WrapTemplate,
    tail_gap: Optional[tuple[Rat, Rat]] = None,
    tail_count: int = 0,
    tail_base: int = 0,
    materialize_last: bool = False,
    setups_below: bool = False,
) -> WrapResult:
    """Wrap `seq` into the explicit gaps followed by `tail_count` identical
    parallel gaps on machines tail_base, tail_base+1, ...  The tail is emitted
    in compressed form.  With materialize_last the final used tail gap becomes
    an explicit machine (so callers can keep filling it).  setups_below
    anchors setups that open a gap under its start; only valid when the
    caller guarantees that much room under every gap."""
    run = _Run(
        builder, explicit, tail_gap, tail_count, tail_base, materialize_last,
        setups_below=setups_below,
    )
    for batch in seq:
        _place_batch(run, batch)
    return run.finish()


def wrap(seq: WrapSequence, template: WrapTemplate, m: Optional[int] = None) -> tuple[Schedule, WrapResult]:
    """Plain wrapping into an explicit template; returns the partial schedule
    (machines renumbered consecutively) and per-gap fill levels."""
    builder = Builder(m if m is not None else (template[-1].machine + 1 if template else 0))
    result = run_wrap(builder, seq, list(template))
    return builder.finalize(), result


def split(
    piece: tuple[int, Rat, JobRef, Rat],
    template: WrapTemplate,
    gap_index: int,
    t: Rat,
    m: Optional[int] = None,
) -> tuple[int, Rat, Schedule]:
    """Place one job piece starting at time t inside gap `gap_index`,
    cutting at gap ends; returns the gap index and time right after it.

    `piece` is (class, setup of the class, job ref, duration).
    """
    cls, setup, ref, dur = piece
    gap = template[gap_index]
    if not (gap.open <= t < gap.close):
        raise ValueError(f"t={t} outside gap [{gap.open}, {gap.close})")
    builder = Builder(m if m is not None else template[-1].machine + 1)
    run = _Run(builder, list(template), None, 0, 0, False)
    run.pos = gap_index
    run._sync()
    run.t = t
    _place_item(run, cls, setup, ref, dur)
    return run.pos, run.t, builder.finalize()


def wrap_parallel_compressed(
    seq: WrapSequence, gap: tuple[Rat, Rat], count: int, m: Optional[int] = None
) -> tuple[Schedule, WrapResult]:
    """Wrap into `count` identical gaps; output size is O(|seq|), independent
    of count.  Expanding the schedule reproduces the plain wrap exactly."""
    builder = Builder(m if m is not None else count)
    result = run_wrap(builder, seq, [], tail_gap=gap, tail_count=count, tail_base=0)
    return builder.finalize(), result


def batches_from_classes(
    classes: list[tuple[int, int, list[tuple[JobRef, Rat]]]]
) -> WrapSequence:
    """Helper: build a wrap sequence from (class index, setup, items) triples."""
    return [
        Batch(cls=i, setup=Fraction(s), jobs=tuple(items)) for i, s, items in classes
    ]
