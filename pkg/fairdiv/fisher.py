"""
fairdiv/fisher.py
EF1 + PO for bivalued chores through Fisher-market equilibria.

State machine over (allocation, prices):
  phase 1   welfare-maximal allocation, prices p or p² per chore
  phase 2a  move non-entitled chores from earlier H-sets to later ones
  phase 2b  move chores along MPB alternating paths toward the least spender
  phase 3   freeze the least spenders' component H_k and divide its prices by p

Every mutation re-checks the equilibrium condition; every phase boundary
checks the structural invariants the termination argument rests on. A failed
check raises InvariantViolation and lands in the trace as an assert event.

Trace records (JSON-ready dicts, Fractions as 'a/b' strings):
  {"event": "phase",    "phase": "0"|"1"|"2a"|"2b"|"3"|"done", ...}
  {"event": "transfer", "phase": ..., "chore": c, "from": i, "to": j, ...}
  {"event": "price",    "chore": c, "old": ..., "new": ...}
  {"event": "assert",   "check": name, "ok": bool, ...}
"""

from __future__ import annotations

# ── stdlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

# ── third-party
import networkx as nx

# ── local
from fairdiv.core import (Allocation, ClassMismatch, Instance, InvariantViolation, Kind, Normalized,
                          PartialAllocation, magnitudes, normalize_bivalued_chores)
from fairdiv.fairness import is_ef1, is_pef1, price_up_to_one
from fairdiv.utils import jsonable, vlog


# ── state ───────────────────────────────────────────────────────────────
@dataclass
class MarketState:
    cost: tuple                     # |v_i(c)| of the normalized instance, each 1 or p
    bundles: list                   # set of chores per agent
    prices: list                    # Fraction per chore
    p: Fraction
    k: int = 1
    H: list = field(default_factory=list)          # H_1 .. H_{k-1}
    entitled: dict = field(default_factory=dict)   # agent → frozenset of chores
    trace: list = field(default_factory=list)
    phase3_runs: int = 0

    @property
    def n(self) -> int:
        return len(self.cost)

    @property
    def m(self) -> int:
        return len(self.prices)

    def owner(self, c: int) -> int:
        return next(i for i, b in enumerate(self.bundles) if c in b)

    def spending(self, i: int) -> Fraction:
        return sum((self.prices[c] for c in self.bundles[i]), Fraction(0))

    def upto1(self, i: int) -> Fraction:
        return Fraction(price_up_to_one(self.bundles[i], self.prices))

    def least_spending(self) -> Fraction:
        return min(self.spending(i) for i in range(self.n))

    def least_spenders(self) -> list:
        low = self.least_spending()
        return [i for i in range(self.n) if self.spending(i) == low]

    def mpb(self, i: int) -> Fraction:
        return min(mpb_ratio(self, i, c) for c in range(self.m))

    def is_mpb(self, i: int, c: int) -> bool:
        return mpb_ratio(self, i, c) == self.mpb(i)

    def frozen_agents(self) -> frozenset:
        return frozenset().union(*self.H)

    def allocation(self) -> Allocation:
        return Allocation(tuple(self.bundles), self.m)

    def record(self, event: str, **kw):
        self.trace.append(jsonable({"event": event, **kw}))

    def transfer(self, c: int, to: int, phase: str, **extra):
        frm = self.owner(c)
        self.bundles[frm].discard(c)
        self.bundles[to].add(c)
        self.record("transfer", phase=phase, chore=c, **{"from": frm, "to": to}, **extra)
        check_equilibrium(self)


@dataclass(frozen=True)
class MpbPath:
    """agents[0] <-chores[0]- agents[1] <-chores[1]- ... : chores[t] is held by
    agents[t+1] and is an MPB chore for agents[t]."""
    agents: tuple
    chores: tuple


@dataclass(frozen=True)
class FisherResult:
    allocation: Allocation
    prices: tuple
    p: Fraction
    trace: tuple
    phase3_runs: int

    def __iter__(self):
        return iter((self.allocation, self.trace))


# ── checks ──────────────────────────────────────────────────────────────
def mpb_ratio(state: MarketState, agent: int, chore: int) -> Fraction:
    return Fraction(state.cost[agent][chore]) / state.prices[chore]


def _check(state: MarketState, name: str, ok: bool, **detail):
    state.record("assert", check=name, ok=bool(ok), **detail)
    if not ok:
        raise InvariantViolation(f"{name} failed at iteration {state.k}: {jsonable(detail)}")


def check_equilibrium(state: MarketState):
    for i, b in enumerate(state.bundles):
        if not b:
            continue
        floor = state.mpb(i)
        off = sorted(c for c in b if mpb_ratio(state, i, c) != floor)
        if off:
            _check(state, "equilibrium", False, agent=i, chores=off)


def _phase2b_bound(n: int, m: int) -> int:
    return (m * n * n + m + 1) * n * (m + 1) ** 2 + 1


def mpb_graph(state: MarketState) -> nx.DiGraph:
    """Edge j → i labelled with the lowest chore of i that is MPB for j."""
    g = nx.DiGraph()
    g.add_nodes_from(range(state.n))
    floors = [state.mpb(j) for j in range(state.n)] if state.m else []
    for j in range(state.n):
        for i in range(state.n):
            if i == j:
                continue
            hits = [c for c in sorted(state.bundles[i]) if mpb_ratio(state, j, c) == floors[j]]
            if hits:
                g.add_edge(j, i, chore=hits[0])
    return g


# ── phases ──────────────────────────────────────────────────────────────
def phase1_initialize(inst, p: Optional[Fraction] = None) -> MarketState:
    """Welfare-maximal allocation (lowest index on ties), price p·min_i |v_i(c)|."""
    if isinstance(inst, Normalized):
        inst, p = inst.instance, inst.p
    mags = set().union(*(magnitudes(r) for r in inst.valuations)) if inst.m else set()
    if p is None:
        extra = sorted(mags - {1})
        p = Fraction(extra[0]) if extra else Fraction(2)
    p = Fraction(p)
    if p <= 1 or not mags <= {1, p} or any(x > 0 for r in inst.valuations for x in r):
        raise ClassMismatch(f"instance is not in bivalued normal form {{-1, -{p}}}")
    if inst.m and any(1 not in magnitudes(r) for r in inst.valuations):
        raise ClassMismatch("every agent needs a chore it values at -1")

    cost = tuple(tuple(-x for x in r) for r in inst.valuations)
    bundles = [set() for _ in range(inst.n)]
    prices = []
    for c in range(inst.m):
        low = min(cost[i][c] for i in range(inst.n))
        bundles[next(i for i in range(inst.n) if cost[i][c] == low)].add(c)
        prices.append(p * low)
    state = MarketState(cost, bundles, prices, p)
    state.record("phase", phase="1", p=p, prices=list(prices),
                 bundles=[sorted(b) for b in bundles])
    check_equilibrium(state)
    if state.m:
        _check(state, "initial_mpb", all(state.mpb(i) == 1 / p for i in range(state.n)))
    return state


def phase2a(state: MarketState) -> MarketState:
    if state.k < 2:
        return state
    state.record("phase", phase="2a", k=state.k)
    for l in range(state.k - 2, 0, -1):
        src = sorted(state.H[l - 1])
        dst = sorted(frozenset().union(*state.H[l:]))
        moves = 0
        while True:
            i = min(src, key=lambda a: (-state.upto1(a), a))
            j = min(dst, key=lambda a: (state.spending(a), a))
            if not state.upto1(i) > state.spending(j):
                break
            free = sorted(state.bundles[i] - state.entitled.get(i, frozenset()))
            _check(state, "non_entitled_available", bool(free), agent=i, level=l)
            _check(state, "non_entitled_is_mpb", all(state.is_mpb(j, c) for c in free),
                   agent=j, chores=free)
            state.transfer(free[0], j, "2a", level=l)
            moves += 1
            if moves > state.m:
                raise InvariantViolation(f"phase 2a moved more than m chores out of H_{l}")
    return state


def find_violator_path(state: MarketState) -> Optional[MpbPath]:
    """Shortest MPB alternating path from a least spender to a violator.

    Least spenders are tried in index order; the first that reaches a violator
    wins, and among its nearest violators the lowest index.
    """
    low = state.least_spending()
    g = mpb_graph(state)
    for ls in state.least_spenders():
        paths = nx.single_source_shortest_path(g, ls)
        viol = [i for i in paths if state.upto1(i) > low]
        if viol:
            target = min(viol, key=lambda i: (len(paths[i]), i))
            agents = paths[target]
            return MpbPath(tuple(agents), tuple(g.edges[a, b]["chore"]
                                                for a, b in zip(agents, agents[1:])))
    return None


def phase2b(state: MarketState):
    check_equilibrium(state)
    floor = state.least_spending()
    state.record("phase", phase="2b", k=state.k, least_spending=floor)
    bound, steps = _phase2b_bound(state.n, state.m), 0
    while (path := find_violator_path(state)) is not None:
        state.transfer(path.chores[-1], path.agents[-2], "2b",
                       path=list(path.agents), least_spending=None)
        now = state.least_spending()
        state.trace[-1]["least_spending"] = jsonable(now)
        if now < floor:
            _check(state, "least_spending_monotone", False, before=floor, after=now)
        floor = now
        steps += 1
        if steps > bound:
            raise InvariantViolation(f"phase 2b exceeded {bound} transfers")
    done = is_pef1(PartialAllocation(tuple(state.bundles)), state.prices).holds if state.m else True
    return state, done


def phase3(state: MarketState) -> MarketState:
    low = state.least_spending()
    g = mpb_graph(state)
    hk = set()
    for ls in state.least_spenders():
        hk |= {ls} | nx.descendants(g, ls)
    hk = frozenset(hk)
    state.record("phase", phase="3", k=state.k, H=sorted(hk))

    earlier = state.frozen_agents()
    _check(state, "h_sets_disjoint", not (hk & earlier), H=sorted(hk), earlier=sorted(earlier))
    _check(state, "frozen_not_violators",
           all(state.upto1(i) <= low for i in earlier | hk), least_spending=low)
    outside = [c for c in range(state.m) if state.owner(c) not in hk]
    if not outside:
        raise InvariantViolation("phase 3 found no chore outside H_k")
    alpha = min(mpb_ratio(state, i, c) / state.mpb(i) for i in hk for c in outside)
    _check(state, "alpha_equals_p", alpha == state.p, alpha=alpha)

    for i in sorted(hk):
        state.entitled[i] = frozenset(state.bundles[i])
        for c in sorted(state.bundles[i]):
            old = state.prices[c]
            state.prices[c] = old / alpha
            state.record("price", chore=c, old=old, new=state.prices[c])
    state.H.append(hk)
    state.k += 1
    state.phase3_runs += 1
    check_equilibrium(state)
    _check_after_price_drop(state)
    if state.phase3_runs > state.n:
        raise InvariantViolation(f"more than n={state.n} price reductions")
    return state


def _check_after_price_drop(state: MarketState):
    frozen = state.frozen_agents()
    _check(state, "entitled_owned",
           all(state.entitled[i] <= state.bundles[i] for i in frozen))
    held = frozenset().union(*(state.entitled[i] for i in frozen))
    _check(state, "prices_one_or_p",
           all(q in (1, state.p) and (q != 1 or c in held) for c, q in enumerate(state.prices)))
    _check(state, "mpb_levels",
           all(state.mpb(i) == (1 if i in frozen else 1 / state.p) for i in range(state.n)))


# ── driver ──────────────────────────────────────────────────────────────
def solve_ef1_po(inst: Instance) -> FisherResult:
    norm = normalize_bivalued_chores(inst)
    state = phase1_initialize(norm)
    while True:
        phase2a(state)
        state, done = phase2b(state)
        if done:
            break
        phase3(state)
        vlog(f"💸 price drop {state.phase3_runs}: H = {sorted(state.H[-1])}")
    alloc = state.allocation()
    if not is_ef1(inst, alloc).holds:
        raise InvariantViolation("terminal pEF1 equilibrium is not EF1")
    state.record("phase", phase="done", phase3_runs=state.phase3_runs,
                 bundles=[sorted(b) for b in state.bundles])
    return FisherResult(alloc, tuple(state.prices), state.p, tuple(state.trace), state.phase3_runs)


# ── zero-valued chores ──────────────────────────────────────────────────
def allocate_zero_chores(inst: Instance):
    """({chore: agent} for chores someone values at 0, remaining chores).

    Each such chore goes to the lowest-index agent that values it at 0.
    """
    if inst.kind is not Kind.CHORES:
        raise ClassMismatch("zero-chore preprocessing is defined for chores only")
    zeros, rest = {}, []
    for c in range(inst.m):
        free = [i for i in range(inst.n) if inst.valuations[i][c] == 0]
        if free:
            zeros[c] = free[0]
        else:
            rest.append(c)
    return zeros, tuple(rest)


def solve_ef1_po_with_zeros(inst: Instance) -> FisherResult:
    """EF1 + PO for bivalued chores that may also carry zero valuations.

    Zero-valued chores go to an agent that does not mind them and the market
    runs on the rest; binary {0, -1} instances end up split as evenly as
    possible. Zero-valued chores carry price 0. After the leading phase "0"
    event, chore numbers in the trace are positions in its "remaining" list.
    """
    zeros, rest = allocate_zero_chores(inst)
    if not zeros:
        return solve_ef1_po(inst)
    sub = solve_ef1_po(inst.restrict(range(inst.n), rest))
    bundles = [{rest[c] for c in b} for b in sub.allocation.bundles]
    for c, i in zeros.items():
        bundles[i].add(c)
    alloc = Allocation(tuple(bundles), inst.m)
    if not is_ef1(inst, alloc).holds:
        raise InvariantViolation("zero-chore assignment broke EF1")
    prices = [Fraction(0)] * inst.m
    for c, q in zip(rest, sub.prices):
        prices[c] = q
    head = jsonable({"event": "phase", "phase": "0",
                     "zero_chores": {str(c): i for c, i in sorted(zeros.items())},
                     "remaining": list(rest)})
    vlog(f"🆓 {len(zeros)} zero-valued chore(s) assigned up front")
    return FisherResult(alloc, tuple(prices), sub.p, (head,) + sub.trace, sub.phase3_runs)
