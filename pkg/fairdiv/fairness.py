"""
fairdiv/fairness.py
Decision procedures for EF, EF1, pEF1 and MMS satisfaction.

Witnesses are the lexicographically smallest violating pair (i, j), 0-based.
PO checks live in oracle.py (exhaustive) and pareto.py (exchange cycles).
"""

from __future__ import annotations

# ── stdlib
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

# ── local
from fairdiv.core import Instance, InstanceError, PartialAllocation, Value, check_allocation


class Property(str, Enum):
    EF   = "ef"
    EF1  = "ef1"
    PEF1 = "pef1"
    MMS  = "mms"
    PO   = "po"


@dataclass(frozen=True)
class FairnessReport:
    property: Property
    holds: bool
    witness: Optional[tuple] = None
    detail: dict = field(default_factory=dict, compare=False)

    def __bool__(self):
        return self.holds

    def to_doc(self, inst: Instance = None) -> dict:
        doc = {"property": self.property.value, "holds": self.holds}
        if self.witness is not None:
            doc["witness"] = [i + 1 for i in self.witness]
            if inst is not None:
                doc["witness_agents"] = [inst.agents[i] for i in self.witness]
        if self.detail:
            doc["detail"] = self.detail
        return doc


def _pairs(n: int):
    return ((i, j) for i in range(n) for j in range(n) if i != j)


# ── envy ────────────────────────────────────────────────────────────────
def is_ef(inst: Instance, alloc: PartialAllocation) -> FairnessReport:
    check_allocation(inst, alloc)
    x = alloc.bundles
    for i, j in _pairs(inst.n):
        own, other = inst.value(i, x[i]), inst.value(i, x[j])
        if own < other:
            return FairnessReport(Property.EF, False, (i, j), {"own": str(own), "other": str(other)})
    return FairnessReport(Property.EF, True)


def is_ef1(inst: Instance, alloc: PartialAllocation) -> FairnessReport:
    """Envy vanishes after removing one item from either bundle of the pair."""
    check_allocation(inst, alloc)
    x, v = alloc.bundles, inst.valuations
    for i, j in _pairs(inst.n):
        if not (x[i] or x[j]):
            continue
        own, other = inst.value(i, x[i]), inst.value(i, x[j])
        if any(own - v[i][r] >= other for r in x[i]) or any(own >= other - v[i][r] for r in x[j]):
            continue
        return FairnessReport(Property.EF1, False, (i, j),
                              {"own": str(own), "other": str(other), "saving_item": None})
    return FairnessReport(Property.EF1, True)


def ef1_goods_form(inst: Instance, alloc: PartialAllocation) -> FairnessReport:
    """Goods reading of EF1: drop the envied bundle's best good."""
    check_allocation(inst, alloc)
    x, v = alloc.bundles, inst.valuations
    for i, j in _pairs(inst.n):
        if not x[j]:
            continue
        best = max(v[i][r] for r in x[j])
        if inst.value(i, x[i]) < inst.value(i, x[j]) - best:
            return FairnessReport(Property.EF1, False, (i, j))
    return FairnessReport(Property.EF1, True)


def ef1_chores_form(inst: Instance, alloc: PartialAllocation) -> FairnessReport:
    """Chores reading of EF1: drop the envious agent's worst chore."""
    check_allocation(inst, alloc)
    x, v = alloc.bundles, inst.valuations
    for i, j in _pairs(inst.n):
        if not x[i]:
            continue
        worst = min(v[i][r] for r in x[i])
        if inst.value(i, x[i]) - worst < inst.value(i, x[j]):
            return FairnessReport(Property.EF1, False, (i, j))
    return FairnessReport(Property.EF1, True)


# ── prices ──────────────────────────────────────────────────────────────
def price_up_to_one(bundle, prices: Sequence[Value]) -> Value:
    if not bundle:
        return 0
    ps = [prices[c] for c in bundle]
    return sum(ps, 0) - max(ps)


def is_pef1(alloc: PartialAllocation, prices: Sequence[Value]) -> FairnessReport:
    if any(p <= 0 for p in prices):
        raise InstanceError("prices must be strictly positive")
    spend = [sum((prices[c] for c in b), 0) for b in alloc.bundles]
    for i, b in enumerate(alloc.bundles):
        if not b:
            continue
        upto1 = price_up_to_one(b, prices)
        for j in range(alloc.n):
            if j != i and upto1 > spend[j]:
                return FairnessReport(Property.PEF1, False, (i, j),
                                      {"price_up_to_one": str(Fraction(upto1)),
                                       "spending": str(Fraction(spend[j]))})
    return FairnessReport(Property.PEF1, True)


# ── maximin share ───────────────────────────────────────────────────────
def is_mms_alloc(inst: Instance, alloc: PartialAllocation, mms_values: Sequence[Value]) -> FairnessReport:
    check_allocation(inst, alloc)
    if len(mms_values) != inst.n:
        raise InstanceError("need one MMS value per agent")
    for i, b in enumerate(alloc.bundles):
        got = inst.value(i, b)
        if got < mms_values[i]:
            return FairnessReport(Property.MMS, False, (i,),
                                  {"value": str(got), "mms": str(mms_values[i])})
    return FairnessReport(Property.MMS, True)
