"""
fairdiv/oracle.py
Brute-force ground truth at desk scale: every allocation, exact maximin
shares and exhaustive Pareto optimality.

Each entry point refuses (BudgetExceeded) when n^m is over the budget; it
never falls back to sampling. exact_mms and is_po_bruteforce cut branches
only when they provably cannot change the answer, so both stay exhaustive.
"""

from __future__ import annotations

# ── stdlib
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

# ── local
from fairdiv.core import (Allocation, BudgetExceeded, ConfigError, Instance, InstanceError,
                          Value, check_allocation)
from fairdiv.fairness import FairnessReport, Property, is_ef1
from fairdiv.mms import MaximinPartition, greedy_partition
from fairdiv.utils import oracle_budget, vlog


@dataclass(frozen=True)
class EnumerationBudget:
    max_assignments: int = field(default_factory=oracle_budget)

    def __post_init__(self):
        if self.max_assignments <= 0:
            raise ConfigError(f"oracle budget must be positive, got {self.max_assignments}")

    def allows(self, n: int, m: int) -> bool:
        return n ** m <= self.max_assignments

    def check(self, n: int, m: int):
        if not self.allows(n, m):
            raise BudgetExceeded(f"{n}^{m} = {n ** m} assignments exceed the oracle "
                                 f"budget of {self.max_assignments}")


def _budget(budget: Optional[EnumerationBudget]) -> EnumerationBudget:
    return budget if budget is not None else EnumerationBudget()


# ── enumeration ─────────────────────────────────────────────────────────
def enumerate_allocations(n: int, m: int, budget: EnumerationBudget = None) -> Iterator[Allocation]:
    """All n^m assignments, item 1 varying slowest, agent 1 first."""
    if n < 1 or m < 0:
        raise InstanceError(f"cannot enumerate n={n}, m={m}")
    _budget(budget).check(n, m)
    return (Allocation.from_owners(owners, n)
            for owners in itertools.product(range(n), repeat=m))


# ── maximin share ───────────────────────────────────────────────────────
def exact_mms(values: Sequence[Value], n: int, budget: EnumerationBudget = None):
    """(MMS^n value, a maximin n-partition) for one utility row."""
    values = tuple(values)
    m = len(values)
    if n < 1:
        raise InstanceError("need at least one bundle")
    _budget(budget).check(n, m)
    seed = greedy_partition(values, n)
    if m == 0:
        return seed.min_value, seed

    order = sorted(range(m), key=lambda r: (-abs(values[r]), r))
    suffix = [0] * (m + 1)
    for t in range(m - 1, -1, -1):
        suffix[t] = suffix[t + 1] + values[order[t]]
    goods = any(x > 0 for x in values)

    best, best_assign = seed.min_value, None
    sums, assign, seen = [], [0] * m, set()

    def floor_of(sums):
        return min(sums + [0] * (n - len(sums)))

    def dfs(t):
        nonlocal best, best_assign
        if t == m:
            val = floor_of(sums)
            if val > best:
                best, best_assign = val, list(assign)
            return
        key = (t, tuple(sorted(sums)))
        if key in seen:
            return
        seen.add(key)
        if goods and sum(sums) + suffix[t] <= best * n:
            return
        if not goods and floor_of(sums) <= best:
            return
        x, r = values[order[t]], order[t]
        for b in range(len(sums)):
            sums[b] += x
            assign[r] = b
            dfs(t + 1)
            sums[b] -= x
        if len(sums) < n:
            sums.append(x)
            assign[r] = len(sums) - 1
            dfs(t + 1)
            sums.pop()

    dfs(0)
    vlog(f"🔎 exact_mms n={n} m={m}: {len(seen)} states, value {best}")
    if best_assign is None:
        return best, seed
    bundles = [set() for _ in range(n)]
    for r, b in enumerate(best_assign):
        bundles[b].add(r)
    return best, MaximinPartition(tuple(frozenset(b) for b in bundles), best)


# ── Pareto optimality ───────────────────────────────────────────────────
def is_po_bruteforce(inst: Instance, alloc: Allocation, budget: EnumerationBudget = None) -> FairnessReport:
    """PO iff no assignment leaves everyone weakly and someone strictly better off.

    The witness lists the agents the dominating allocation strictly improves;
    the allocation itself sits in detail['dominating'].
    """
    check_allocation(inst, alloc)
    n, m, v = inst.n, inst.m, inst.valuations
    _budget(budget).check(n, m)
    u = inst.utilities(alloc)
    # gain[i][t]: most agent i can still add from items t..m-1
    gain = [[0] * (m + 1) for _ in range(n)]
    for i in range(n):
        for t in range(m - 1, -1, -1):
            gain[i][t] = gain[i][t + 1] + max(v[i][t], 0)
    partial, owners, dead = [0] * n, [0] * m, set()

    def dfs(t):
        if t == m:
            return any(partial[i] > u[i] for i in range(n))
        key = (t, tuple(partial))
        if key in dead:
            return False
        for i in range(n):
            partial[i] += v[i][t]
            owners[t] = i
            if all(partial[k] + gain[k][t + 1] >= u[k] for k in range(n)) and dfs(t + 1):
                return True
            partial[i] -= v[i][t]
        dead.add(key)
        return False

    if not dfs(0):
        return FairnessReport(Property.PO, True)
    better = Allocation.from_owners(owners, n)
    gained = tuple(i for i, w in enumerate(inst.utilities(better)) if w > u[i])
    return FairnessReport(Property.PO, False, gained,
                          {"dominating": [sorted(b) for b in better.bundles]})


def exists_ef1_po(inst: Instance, budget: EnumerationBudget = None) -> Optional[Allocation]:
    """First allocation in enumeration order that is both EF1 and PO."""
    for alloc in enumerate_allocations(inst.n, inst.m, budget):
        if is_ef1(inst, alloc).holds and is_po_bruteforce(inst, alloc, budget).holds:
            return alloc
    return None
