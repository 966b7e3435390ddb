"""
fairdiv/fixtures.py
Worked examples with known answers, runnable as a self-check (cli.py fixtures).

Positions in the tables are 0-based here: "{1, 4, 7}" is frozenset({0, 3, 6}).
"""

from __future__ import annotations

# ── stdlib
from dataclasses import dataclass, field

# ── local
from fairdiv.core import Allocation, ClassTag, Instance, Kind, NotFactored
from fairdiv.fairness import is_ef1
from fairdiv.fisher import solve_ef1_po
from fairdiv.mms import (Reduction, cut_profile_pbv, first_bad_cut, greedy_partition,
                         mms_partition_factored, select_reduction)
from fairdiv.oracle import exact_mms, is_po_bruteforce

# ── data ────────────────────────────────────────────────────────────────
GREEDY_ROW        = (12, 6, 6, 3, 3, 3, 3, 1, 1)      # n = 4
GREEDY_PLACEMENTS = (0, 1, 2, 3, 3, 1, 2, 3, 3)
GREEDY_BUNDLES    = ({0}, {1, 5}, {2, 6}, {3, 4, 7, 8})

NON_FACTORED_ROW  = (3, 3, 2, 2, 2)                    # n = 2: greedy 5, true 6

WOLEX_ROWS = ((81, 81, 81, 81, 9, 9, 9, 1, 1),
              (81, 81, 81, 9, 9, 9, 1, 1, 1),
              (729, 81, 81, 81, 9, 9, 9, 1, 1))
WOLEX_CUTS = (4, 9, 1)

PBV_ROWS = ((2, 2, 2, 2, 1, 1, 1, 1, 1),
            (5, 1, 1, 1, 1, 1, 1, 1, 1),
            (4, 4, 4, 4, 4, 4, 4, 4, 1))
PBV_PROFILES = ((4, 2, 4), (1, 2, 8), (8, 1, 1))      # (cut, active, idle)

EF1_FAILURE = Instance(Kind.CHORES, (
    (-4, -4, -1, -1, -1, -1, -1, -1),
    (-4, -4, -1, -1, -4, -4, -4, -4),
    (-4, -4, -4, -4, -1, -1, -4, -4),
    (-4, -4, -4, -4, -4, -4, -1, -1),
))
# welfare-product style allocation that still violates EF1
EF1_FAILURE_ALLOCATION = Allocation(({4, 5, 6, 7}, {2, 3}, {1}, {0}), 8)


def table_instance(rows, kind: Kind) -> Instance:
    sign = kind.sign
    return Instance(kind, tuple(tuple(sign * x for x in r) for r in rows),
                    agents=("i1", "i2", "i3"))


# ── checks ──────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class FixtureResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)


def greedy_trace() -> FixtureResult:
    part = greedy_partition(GREEDY_ROW, 4)
    factored = mms_partition_factored(GREEDY_ROW, 4)
    ok = (factored.min_value == 8 and part.placements == GREEDY_PLACEMENTS
          and part.bundles == tuple(frozenset(b) for b in GREEDY_BUNDLES))
    return FixtureResult("greedy_trace", ok, {"min_value": part.min_value,
                                              "placements": list(part.placements)})


def non_factored_counterexample() -> FixtureResult:
    value, _ = exact_mms(NON_FACTORED_ROW, 2)
    try:
        mms_partition_factored(NON_FACTORED_ROW, 2)
        rejected = False
    except NotFactored:
        rejected = True
    greedy = greedy_partition(NON_FACTORED_ROW, 2).min_value
    return FixtureResult("non_factored_counterexample", value == 6 and rejected and greedy == 5,
                         {"exact": value, "greedy": greedy, "rejected": rejected})


def _reduction(red: Reduction) -> list:
    return [red.agent, sorted(red.bundle)]


def wolex_bad_cuts() -> FixtureResult:
    cuts = tuple(first_bad_cut(r, 3) for r in WOLEX_ROWS)
    goods = select_reduction(table_instance(WOLEX_ROWS, Kind.GOODS), ClassTag.WEAKLY_LEXICOGRAPHIC)
    chores = select_reduction(table_instance(WOLEX_ROWS, Kind.CHORES), ClassTag.WEAKLY_LEXICOGRAPHIC)
    ok = (cuts == WOLEX_CUTS
          and (goods.agent, goods.bundle) == (2, frozenset({0}))
          and (chores.agent, chores.bundle) == (1, frozenset({0, 3, 6})))
    return FixtureResult("wolex_bad_cuts", ok, {"cuts": list(cuts), "goods": _reduction(goods),
                                                "chores": _reduction(chores)})


def pbv_idle_times() -> FixtureResult:
    profiles = tuple(cut_profile_pbv(r, 3) for r in PBV_ROWS)
    triples = tuple((p.cut, p.active, p.idle) for p in profiles)
    cls = ClassTag.FACTORED_PERSONALIZED_BIVALUED
    goods = select_reduction(table_instance(PBV_ROWS, Kind.GOODS), cls)
    chores = select_reduction(table_instance(PBV_ROWS, Kind.CHORES), cls)
    ok = (triples == PBV_PROFILES
          and (goods.agent, goods.bundle) == (1, frozenset({0}))
          and (chores.agent, chores.bundle) == (0, frozenset({0, 3, 6})))
    return FixtureResult("pbv_idle_times", ok, {"profiles": [list(t) for t in triples],
                                                "goods": _reduction(goods),
                                                "chores": _reduction(chores)})


def ef1_failure() -> FixtureResult:
    report = is_ef1(EF1_FAILURE, EF1_FAILURE_ALLOCATION)
    alloc, _ = solve_ef1_po(EF1_FAILURE)
    solved_ef1 = is_ef1(EF1_FAILURE, alloc).holds
    solved_po = is_po_bruteforce(EF1_FAILURE, alloc).holds
    ok = not report.holds and report.witness == (0, 1) and solved_ef1 and solved_po
    return FixtureResult("ef1_failure", ok, {"witness": list(report.witness or ()),
                                             "solver_ef1": solved_ef1, "solver_po": solved_po,
                                             "solver_bundles": [sorted(b) for b in alloc.bundles]})


FIXTURES = (greedy_trace, non_factored_counterexample, wolex_bad_cuts, pbv_idle_times, ef1_failure)


def run_fixtures() -> list:
    return [f() for f in FIXTURES]
