"""
fairdiv/pareto.py
Pareto improvements through item exchange cycles, improvement chains that
end in a PO allocation, and MMS + PO on top of the MMS solver.

Exchange graph: one node per item, edge r → r' when the holder of r weakly
prefers r' to r (strict when it strictly prefers). For weakly lexicographic
and bivalued utilities an allocation is PO exactly when no cycle of this
graph carries a strict edge.
"""

from __future__ import annotations

# ── stdlib
from dataclasses import dataclass
from typing import Iterable, Optional

# ── third-party
import networkx as nx

# ── local
from fairdiv.core import (Allocation, ClassMismatch, ClassTag, Instance, InvariantViolation, Kind,
                          UtilityClass, check_allocation, classify, normalize_bivalued_chores,
                          tier_ranks)
from fairdiv.fairness import FairnessReport, Property
from fairdiv.mms import solve_mms
from fairdiv.oracle import EnumerationBudget, enumerate_allocations, is_po_bruteforce
from fairdiv.utils import vlog


@dataclass(frozen=True)
class ImprovementCycle:
    """Exchange: agents[t] hands items[t] on and receives items[t+1] (cyclic).

    agents[t] holds items[t]; strict_edge marks an exchange its agent strictly
    prefers. Agents may repeat when one agent holds several cycle items.
    """
    agents: tuple
    items: tuple
    strict_edge: int

    def apply(self, alloc: Allocation) -> Allocation:
        owners = list(alloc.owners())
        k = len(self.items)
        for t in range(k):
            owners[self.items[(t + 1) % k]] = self.agents[t]
        return Allocation.from_owners(owners, alloc.n)


@dataclass(frozen=True)
class ChainStep:
    cycle: ImprovementCycle
    allocation: Allocation
    potential: int


@dataclass(frozen=True)
class EquivalenceReport:
    checked: int
    agreements: int
    disagreements: tuple

    @property
    def holds(self) -> bool:
        return not self.disagreements


def _bivalued(inst: Instance) -> Optional[UtilityClass]:
    return next((c for c in classify(inst) if c.tag is ClassTag.BIVALUED), None)


def _require_supported(inst: Instance):
    found = {c.tag for c in classify(inst)}
    if not found & {ClassTag.BIVALUED, ClassTag.WEAKLY_LEXICOGRAPHIC}:
        raise ClassMismatch("exchange-cycle PO test needs bivalued or weakly lexicographic utilities")


# ── improvements ────────────────────────────────────────────────────────
def exchange_graph(inst: Instance, alloc: Allocation) -> nx.DiGraph:
    owners, v = alloc.owners(), inst.valuations
    g = nx.DiGraph()
    g.add_nodes_from(range(inst.m))
    for r in range(inst.m):
        row = v[owners[r]]
        for r2 in range(inst.m):
            if r2 != r and row[r2] >= row[r]:
                g.add_edge(r, r2, strict=row[r2] > row[r])
    return g


def find_pareto_improvement(inst: Instance, alloc: Allocation):
    """(cycle, improved allocation), or None when alloc is PO."""
    _require_supported(inst)
    check_allocation(inst, alloc)
    g = exchange_graph(inst, alloc)
    owners = alloc.owners()
    for r, r2 in sorted((a, b) for a, b, s in g.edges(data="strict") if s):
        try:
            path = nx.shortest_path(g, r2, r)
        except nx.NetworkXNoPath:
            continue
        items = (r,) + tuple(path[:-1])
        cycle = ImprovementCycle(tuple(owners[x] for x in items), items, 0)
        return cycle, cycle.apply(alloc)
    return None


def is_po_by_cycles(inst: Instance, alloc: Allocation) -> bool:
    return find_pareto_improvement(inst, alloc) is None


def _zero_reduced(inst: Instance, alloc: Allocation):
    """Drop chores held by an agent that values them at 0; PO is unaffected."""
    owners = alloc.owners()
    keep = tuple(c for c in range(inst.m) if inst.valuations[owners[c]][c] != 0)
    return keep, inst.restrict(range(inst.n), keep), \
        Allocation.from_owners([owners[c] for c in keep], inst.n)


def po_by_cycles(inst: Instance, alloc: Allocation) -> FairnessReport:
    """PO report from the exchange graph, shaped like the exhaustive one.

    Chores their holder values at 0 are set aside first, and chore rows with
    per-agent scales are read in bivalued normal form. On failure the witness
    lists the agents the improving cycle strictly helps; detail carries the
    improved allocation and the cycle items.
    """
    check_allocation(inst, alloc)
    keep, work, part = None, inst, alloc
    if inst.kind is Kind.CHORES:
        keep, work, part = _zero_reduced(inst, alloc)
        owners = alloc.owners()
        for c in keep:
            takers = [i for i in range(inst.n) if inst.valuations[i][c] == 0]
            if takers:
                moved = list(owners)
                moved[c] = takers[0]
                better = Allocation.from_owners(moved, inst.n)
                return FairnessReport(Property.PO, False, (owners[c],),
                                      {"dominating": [sorted(b) for b in better.bundles],
                                       "cycle_items": [c]})
    try:
        found = find_pareto_improvement(work, part)
    except ClassMismatch:
        if inst.kind is not Kind.CHORES:
            raise
        found = find_pareto_improvement(normalize_bivalued_chores(work).instance, part)
    if found is None:
        return FairnessReport(Property.PO, True)
    cycle, better = found
    if keep is not None:
        owners = list(alloc.owners())
        for c, i in zip(keep, better.owners()):
            owners[c] = i
        better = Allocation.from_owners(owners, inst.n)
        items = [keep[r] for r in cycle.items]
    else:
        items = list(cycle.items)
    before, after = inst.utilities(alloc), inst.utilities(better)
    gained = tuple(i for i in range(inst.n) if after[i] > before[i])
    return FairnessReport(Property.PO, False, gained,
                          {"dominating": [sorted(b) for b in better.bundles],
                           "cycle_items": items})


# ── chains ──────────────────────────────────────────────────────────────
def chain_potential(inst: Instance):
    """(potential, direction, step bound) for improvement chains on inst.

    Bivalued: number of assignments at the larger |value| b; goods raise it,
    chores lower it, at most m steps. Weakly lexicographic: the sum of tier
    ranks (top tier 1) of assigned items; goods lower it, chores raise it,
    at most m² steps.
    """
    biv = _bivalued(inst)
    goods = inst.kind is Kind.GOODS
    if biv is not None:
        b = biv.params[1]
        phi = lambda x: sum(1 for i, bun in enumerate(x.bundles) for r in bun
                            if inst.valuations[i][r] == b)
        return phi, (1 if goods else -1), inst.m
    _require_supported(inst)
    ranks = [tier_ranks(row) for row in inst.valuations]
    phi = lambda x: sum(ranks[i][r] for i, bun in enumerate(x.bundles) for r in bun)
    return phi, (-1 if goods else 1), inst.m * inst.m


def pareto_chain(inst: Instance, alloc: Allocation):
    """Apply improvements until none is left; returns (PO allocation, steps)."""
    phi, direction, bound = chain_potential(inst)
    cur, level, steps = alloc, phi(alloc), []
    while (found := find_pareto_improvement(inst, cur)) is not None:
        cycle, nxt = found
        new = phi(nxt)
        if (new - level) * direction <= 0:
            raise InvariantViolation(f"chain potential moved the wrong way ({level} → {new})")
        steps.append(ChainStep(cycle, nxt, new))
        if len(steps) > bound:
            raise InvariantViolation(f"improvement chain exceeded {bound} steps")
        cur, level = nxt, new
    vlog(f"🔁 pareto chain: {len(steps)} step(s)")
    return cur, tuple(steps)


def solve_mms_po(inst: Instance) -> Allocation:
    found = {c.tag for c in classify(inst)}
    if not found & {ClassTag.WEAKLY_LEXICOGRAPHIC, ClassTag.FACTORED_BIVALUED}:
        raise ClassMismatch("MMS + PO needs weakly lexicographic or factored bivalued "
                            "utilities; personalized bivalued is not supported")
    out, _ = pareto_chain(inst, solve_mms(inst))
    return out


# ── PO vs fPO harness ───────────────────────────────────────────────────
def check_po_fpo_equivalence(inst: Instance, allocs: Iterable[Allocation] = None,
                             budget: EnumerationBudget = None) -> EquivalenceReport:
    """Exchange-cycle verdict against the exhaustive PO oracle, allocation by
    allocation (every allocation when none are given)."""
    if _bivalued(inst) is None:
        raise ClassMismatch("PO/fPO equivalence is only claimed for bivalued instances")
    budget = budget if budget is not None else EnumerationBudget()
    if allocs is None:
        allocs = enumerate_allocations(inst.n, inst.m, budget)
    checked, bad = 0, []
    for alloc in allocs:
        checked += 1
        if is_po_by_cycles(inst, alloc) != is_po_bruteforce(inst, alloc, budget).holds:
            bad.append(alloc)
    return EquivalenceReport(checked, checked - len(bad), tuple(bad))
