"""
fairdiv/mms.py
Maximin shares for factored utilities and the MMS solvers for weakly
lexicographic and factored personalized bivalued instances (goods or chores).

The solver works on the ordered instance: every round picks a valid
reduction (agent, bundle of ordered positions), hands the bundle over and
drops both. Removing positions keeps each row sorted, so one lift at the end
maps the ordered allocation back to real items.

Positions and bundles here are 0-based: the bundle {1, n+1, ..., kn+1} of
ordered positions is frozenset({0, n, ..., kn}).
"""

from __future__ import annotations

# ── stdlib
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

# ── local
from fairdiv.core import (Allocation, ClassMismatch, ClassTag, Instance, InstanceError,
                          InvariantViolation, Kind, NonIntegerRatio, NotFactored, OrderedView,
                          Value, canonicalize_wolex, classify, is_factored_row, is_ordered,
                          is_wolex_row, lift_allocation, magnitudes, order_instance, tags)
from fairdiv.utils import vlog


# ── types ───────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class MaximinPartition:
    """n bundles of item indices; placements[s] is the bundle the s-th
    processed item went to (greedy runs only)."""
    bundles: tuple
    min_value: Value
    placements: tuple = ()


@dataclass(frozen=True)
class CutProfile:
    cut: int        # smallest bad cut, or m
    active: int     # active-bundle count
    idle: int       # idle time
    ratio: int      # large/small value ratio of the row

    @property
    def surplus(self) -> int:
        return max(self.idle - self.active, 0)


class Justification(str, Enum):
    WOLEX     = "wolex-bad-cut"
    PBV       = "pbv-idle-time"
    BASE_CASE = "base-case"


@dataclass(frozen=True)
class Reduction:
    agent: int
    bundle: frozenset
    justification: Justification


# ── greedy partition ────────────────────────────────────────────────────
def _check_signs(values: Sequence[Value]):
    if any(x > 0 for x in values) and any(x < 0 for x in values):
        raise InstanceError("row mixes goods and chores")


def greedy_partition(values: Sequence[Value], n: int) -> MaximinPartition:
    """Largest |value| first, each into the bundle of least |total|.

    Runs on any row; only factored rows are guaranteed a maximin partition.
    """
    if n < 1:
        raise InstanceError("need at least one bundle")
    _check_signs(values)
    order = sorted(range(len(values)), key=lambda r: (-abs(values[r]), r))
    totals = [0] * n
    bundles = [set() for _ in range(n)]
    placements = []
    for r in order:
        b = min(range(n), key=lambda k: (abs(totals[k]), k))
        totals[b] += values[r]
        bundles[b].add(r)
        placements.append(b)
    return MaximinPartition(tuple(frozenset(b) for b in bundles), min(totals), tuple(placements))


def mms_partition_factored(values: Sequence[Value], n: int) -> MaximinPartition:
    if not is_factored_row(values):
        raise NotFactored(f"row {tuple(values)} is not factored; greedy partition is not maximin")
    return greedy_partition(values, n)


def mms_value_factored(values: Sequence[Value], n: int) -> Value:
    return mms_partition_factored(values, n).min_value


# ── cuts and idle time ──────────────────────────────────────────────────
def _check_ordered(values: Sequence[Value]):
    if any(abs(a) < abs(b) for a, b in zip(values, values[1:])):
        raise InstanceError(f"row {tuple(values)} is not ordered by |value|")


def first_bad_cut(values: Sequence[Value], n: int) -> int:
    """Smallest k (1-based) with v(k) != v(k+1) and n not dividing k; m if none."""
    _check_ordered(values)
    m = len(values)
    for k in range(1, m):
        if values[k - 1] != values[k] and k % n:
            return k
    return m


def cut_profile_pbv(values: Sequence[Value], n: int) -> CutProfile:
    _check_ordered(values)
    mags = magnitudes(values)
    if any(x == 0 for x in values) or len(mags) > 2:
        raise ClassMismatch(f"row {tuple(values)} is not personalized bivalued")
    ratio = Fraction(mags[1]) / mags[0] if len(mags) == 2 else Fraction(1)
    if ratio.denominator != 1:
        raise NonIntegerRatio(f"value ratio {ratio} is not an integer; MMS existence "
                              f"for non-integral personalized bivalued rows is open")
    m = len(values)
    cut = first_bad_cut(values, n)
    active = 0 if cut == m else n - cut % n
    return CutProfile(cut, active, min(ratio.numerator * active, m - cut), ratio.numerator)


def _spaced(k: int, n: int) -> frozenset:
    return frozenset(range(0, k * n + 1, n)) if k >= 0 else frozenset()


def wolex_reduction_bundle(cut: int, n: int) -> frozenset:
    return _spaced((cut - 1) // n, n)


def pbv_reduction_bundle(profile: CutProfile, n: int, m: int) -> frozenset:
    return _spaced((m - profile.surplus - 1) // n, n)


# ── reductions ──────────────────────────────────────────────────────────
def select_reduction(ordered: Instance, cls: ClassTag) -> Reduction:
    """A valid reduction on an ordered instance.

    Every agent's candidate is a bundle {0, n, ..., kn} from one of its own
    maximin partitions. Goods go to the agent with the smallest candidate,
    chores to the one with the largest, lowest index on ties.
    """
    if cls not in (ClassTag.WEAKLY_LEXICOGRAPHIC, ClassTag.FACTORED_PERSONALIZED_BIVALUED):
        raise ClassMismatch(f"no reduction rule for class {cls.value}")
    if not is_ordered(ordered):
        raise InstanceError("reductions need an ordered instance")
    n, m = ordered.n, ordered.m
    if n == 1:
        return Reduction(0, frozenset(range(m)), Justification.BASE_CASE)
    if cls is ClassTag.WEAKLY_LEXICOGRAPHIC:
        if not all(is_wolex_row(r) for r in ordered.valuations):
            raise ClassMismatch("instance is not weakly lexicographic")
        cands = [wolex_reduction_bundle(first_bad_cut(r, n), n) for r in ordered.valuations]
        why = Justification.WOLEX
    else:
        cands = [pbv_reduction_bundle(cut_profile_pbv(r, n), n, m) for r in ordered.valuations]
        why = Justification.PBV
    if ordered.kind is Kind.GOODS:
        pick = min(range(n), key=lambda i: (len(cands[i]), i))
    else:
        pick = min(range(n), key=lambda i: (-len(cands[i]), i))
    return Reduction(pick, cands[pick], why)


def mms_class(inst: Instance) -> ClassTag:
    found = tags(classify(inst))
    if ClassTag.WEAKLY_LEXICOGRAPHIC in found:
        return ClassTag.WEAKLY_LEXICOGRAPHIC
    if ClassTag.FACTORED_PERSONALIZED_BIVALUED in found:
        return ClassTag.FACTORED_PERSONALIZED_BIVALUED
    if ClassTag.PERSONALIZED_BIVALUED in found:
        raise NonIntegerRatio("personalized bivalued with a non-integer value ratio; "
                              "MMS existence for this case is open")
    raise ClassMismatch("MMS solver needs weakly lexicographic or factored "
                        "personalized bivalued utilities")


@dataclass(frozen=True)
class ReductionStep:
    instance: Instance      # ordered sub-instance the reduction was chosen on
    agents: tuple           # original agent behind each sub-instance row
    positions: tuple        # ordered position behind each sub-instance column
    reduction: Reduction    # indices local to the sub-instance


@dataclass(frozen=True)
class MmsRun:
    cls: ClassTag
    view: OrderedView
    steps: tuple
    ordered_allocation: Allocation


def mms_reductions(inst: Instance) -> MmsRun:
    cls = mms_class(inst)
    work = canonicalize_wolex(inst) if cls is ClassTag.WEAKLY_LEXICOGRAPHIC else inst
    view = order_instance(work)
    ordered = view.instance
    agents, positions = list(range(inst.n)), list(range(inst.m))
    owners, steps = [None] * inst.m, []
    while agents:
        sub = ordered.restrict(agents, positions)
        if not is_ordered(sub):
            raise InvariantViolation("reduced instance lost its ordering")
        red = select_reduction(sub, cls)
        steps.append(ReductionStep(sub, tuple(agents), tuple(positions), red))
        who = agents.pop(red.agent)
        for t in red.bundle:
            owners[positions[t]] = who
        positions = [q for t, q in enumerate(positions) if t not in red.bundle]
        vlog(f"✂️  {inst.agents[who]} takes ordered positions "
             f"{sorted(steps[-1].positions[t] + 1 for t in red.bundle)} ({red.justification.value})")
    if positions or None in owners:
        raise InvariantViolation("reductions left items unassigned")
    return MmsRun(cls, view, tuple(steps), Allocation.from_owners(owners, inst.n))


def solve_mms(inst: Instance) -> Allocation:
    run = mms_reductions(inst)
    return lift_allocation(run.view, run.ordered_allocation)


def mms_benchmark(inst: Instance):
    """(instance, per-agent MMS^n values) to certify MMS against.

    Factored rows are used as they are; weakly lexicographic rows go through
    canonicalize_wolex first, which leaves every bundle comparison intact.
    """
    work = inst
    if not all(is_factored_row(r) for r in inst.valuations):
        if not all(is_wolex_row(r) for r in inst.valuations):
            raise NotFactored("MMS values need factored or weakly lexicographic rows")
        work = canonicalize_wolex(inst)
    return work, tuple(mms_value_factored(r, inst.n) for r in work.valuations)
