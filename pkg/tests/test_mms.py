import random

import pytest

from conftest import make
from fairdiv.core import (ClassMismatch, ClassTag, InstanceError, Kind, NonIntegerRatio,
                          NotFactored, canonicalize_wolex)
from fairdiv.fixtures import (GREEDY_BUNDLES, GREEDY_PLACEMENTS, GREEDY_ROW, NON_FACTORED_ROW,
                              PBV_PROFILES, PBV_ROWS, WOLEX_CUTS, WOLEX_ROWS, table_instance)
from fairdiv.gen import GenSpec, generate
from fairdiv.mms import (Justification, cut_profile_pbv, first_bad_cut, greedy_partition,
                         mms_benchmark, mms_class, mms_partition_factored, mms_reductions,
                         mms_value_factored, select_reduction, solve_mms)
from fairdiv.oracle import exact_mms


# ── greedy partition ────────────────────────────────────────────────────
def test_greedy_trace_on_factored_row():
    part = mms_partition_factored(GREEDY_ROW, 4)
    assert part.min_value == 8
    assert part.placements == GREEDY_PLACEMENTS
    assert part.bundles == tuple(frozenset(b) for b in GREEDY_BUNDLES)
    assert mms_value_factored(GREEDY_ROW, 4) == 8


def test_non_factored_row_is_refused():
    with pytest.raises(NotFactored):
        mms_partition_factored(NON_FACTORED_ROW, 2)
    assert greedy_partition(NON_FACTORED_ROW, 2).min_value == 5
    assert exact_mms(NON_FACTORED_ROW, 2)[0] == 6


def test_greedy_chores_and_edges():
    assert mms_value_factored((-4, -2, -2, -1, -1), 2) == -5
    assert mms_value_factored((), 3) == 0
    with pytest.raises(InstanceError):
        greedy_partition((1, -1), 2)
    with pytest.raises(InstanceError):
        greedy_partition((1, 1), 0)


def _factored_rows():
    rng = random.Random(2024)
    for t in range(520):
        kind = (Kind.GOODS, Kind.CHORES)[t % 2]
        n, m = rng.randint(1, 4), rng.randint(0, 9)
        cls = (ClassTag.FACTORED, ClassTag.FACTORED_PERSONALIZED_BIVALUED,
               ClassTag.WEAKLY_LEXICOGRAPHIC)[t % 3]
        inst = generate(GenSpec(cls, kind, 1, m, seed=t))
        if cls is ClassTag.WEAKLY_LEXICOGRAPHIC:
            inst = canonicalize_wolex(inst)
        yield inst.valuations[0], n


@pytest.mark.campaign
def test_greedy_matches_exact_mms_on_factored_rows():
    count = 0
    for row, n in _factored_rows():
        assert mms_value_factored(row, n) == exact_mms(row, n)[0], (row, n)
        count += 1
    assert count >= 500


# ── cuts and idle time ──────────────────────────────────────────────────
def test_wolex_bad_cuts():
    assert tuple(first_bad_cut(r, 3) for r in WOLEX_ROWS) == WOLEX_CUTS
    with pytest.raises(InstanceError):
        first_bad_cut((1, 2), 2)


def test_pbv_profiles():
    profiles = [cut_profile_pbv(r, 3) for r in PBV_ROWS]
    assert tuple((p.cut, p.active, p.idle) for p in profiles) == PBV_PROFILES
    assert [p.ratio for p in profiles] == [2, 5, 4]
    with pytest.raises(NonIntegerRatio):
        cut_profile_pbv((3, 2, 2), 2)
    with pytest.raises(ClassMismatch):
        cut_profile_pbv((4, 2, 1), 2)


@pytest.mark.parametrize("kind,agent,bundle", [
    (Kind.GOODS, 2, {0}),
    (Kind.CHORES, 1, {0, 3, 6}),
])
def test_wolex_reduction_choice(kind, agent, bundle):
    red = select_reduction(table_instance(WOLEX_ROWS, kind), ClassTag.WEAKLY_LEXICOGRAPHIC)
    assert (red.agent, red.bundle) == (agent, frozenset(bundle))
    assert red.justification is Justification.WOLEX


@pytest.mark.parametrize("kind,agent,bundle", [
    (Kind.GOODS, 1, {0}),
    (Kind.CHORES, 0, {0, 3, 6}),
])
def test_pbv_reduction_choice(kind, agent, bundle):
    red = select_reduction(table_instance(PBV_ROWS, kind), ClassTag.FACTORED_PERSONALIZED_BIVALUED)
    assert (red.agent, red.bundle) == (agent, frozenset(bundle))
    assert red.justification is Justification.PBV


def test_select_reduction_guards():
    with pytest.raises(InstanceError):
        select_reduction(make([[1, 2], [2, 1]]), ClassTag.WEAKLY_LEXICOGRAPHIC)
    with pytest.raises(ClassMismatch):
        select_reduction(make([[2, 1], [2, 1]]), ClassTag.FACTORED)
    base = select_reduction(make([[4, 2, 1]]), ClassTag.WEAKLY_LEXICOGRAPHIC)
    assert base.justification is Justification.BASE_CASE
    assert base.bundle == frozenset({0, 1, 2})


# ── solvers ─────────────────────────────────────────────────────────────
def test_mms_class_routing():
    assert mms_class(make([[5, 2, 1], [1, 1, 4]])) is ClassTag.WEAKLY_LEXICOGRAPHIC
    assert mms_class(make([[2, 1, 1, 1], [3, 3, 3, 3]])) is ClassTag.FACTORED_PERSONALIZED_BIVALUED
    with pytest.raises(NonIntegerRatio):
        mms_class(make([[3, 2, 2], [1, 1, 1]]))
    with pytest.raises(ClassMismatch):
        mms_class(make([[3, 2, 1, 1]]))


@pytest.mark.parametrize("rows", [WOLEX_ROWS, PBV_ROWS])
@pytest.mark.parametrize("kind", [Kind.GOODS, Kind.CHORES])
def test_table_instances_reach_mms(rows, kind):
    inst = table_instance(rows, kind)
    alloc = solve_mms(inst)
    for i, row in enumerate(inst.valuations):
        assert inst.value(i, alloc.bundles[i]) >= exact_mms(row, inst.n)[0]


def test_benchmark_uses_canonical_rows_for_wolex():
    inst = make([[5, 2, 1], [1, 1, 4]])
    work, values = mms_benchmark(inst)
    assert work.valuations == ((9, 3, 1), (1, 1, 3))
    assert values == (4, 2)
    work, values = mms_benchmark(make([[4, 2, 2], [1, 1, 1]]))
    assert values == (4, 1)
    with pytest.raises(NotFactored):
        mms_benchmark(make([[3, 2, 2]]))


def _assert_valid_reductions(run):
    """Each applied reduction gives its taker at least its share and leaves every
    other agent its share on the remaining items with one bundle fewer."""
    for step in run.steps:
        sub, red = step.instance, step.reduction
        n = sub.n
        rest = [t for t in range(sub.m) if t not in red.bundle]
        for i, row in enumerate(sub.valuations):
            share = exact_mms(row, n)[0]
            if i == red.agent:
                assert sub.value(i, red.bundle) >= share, step
            else:
                left = exact_mms([row[t] for t in rest], n - 1)[0]
                assert left >= share, step


def _mms_campaign(cls, count):
    done = 0
    for seed in range(count):
        kind = (Kind.GOODS, Kind.CHORES)[seed % 2]
        n, m = 2 + seed % 3, 3 + seed % 7
        inst = generate(GenSpec(cls, kind, n, m, seed=seed))
        run = mms_reductions(inst)
        _assert_valid_reductions(run)
        alloc = solve_mms(inst)
        for i, row in enumerate(inst.valuations):
            assert inst.value(i, alloc.bundles[i]) >= exact_mms(row, n)[0], (cls, seed, i)
        done += 1
    return done


@pytest.mark.campaign
def test_wolex_mms_campaign():
    assert _mms_campaign(ClassTag.WEAKLY_LEXICOGRAPHIC, 300) == 300


@pytest.mark.campaign
def test_pbv_mms_campaign():
    assert _mms_campaign(ClassTag.FACTORED_PERSONALIZED_BIVALUED, 300) == 300


def test_reductions_cover_every_item_once():
    inst = generate(GenSpec(ClassTag.WEAKLY_LEXICOGRAPHIC, Kind.GOODS, 3, 8, seed=9))
    run = mms_reductions(inst)
    assert len(run.steps) == 3
    assert run.steps[-1].reduction.justification is Justification.BASE_CASE
    assert run.ordered_allocation.assigned == frozenset(range(8))
