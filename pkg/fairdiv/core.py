"""
fairdiv/core.py
Instances, allocations, utility classes and the ordered-instance machinery
every solver shares.

Valuations are exact: plain ints out of documents, Fractions once a solver
rescales rows. Nothing in the package compares values through floats.

Instance document
─────────────────
  {"kind": "goods"|"chores",          optional, inferred from signs
   "agents": ["a1", ...],             optional names
   "items":  ["c1", ...],             optional names
   "valuations": [[int, ...], ...]}   row i = agent i
"""

from __future__ import annotations

# ── stdlib
import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence, Union

Value = Union[int, Fraction]


# ── errors ──────────────────────────────────────────────────────────────
class FairDivError(Exception):
    """Root of every error the package raises; exit_code is what cli.py returns."""
    exit_code = 2


class InstanceError(FairDivError):
    exit_code = 2


class MixedSigns(InstanceError):
    pass


class ZeroValuation(InstanceError):
    pass


class ConfigError(InstanceError):
    pass


class BudgetExceeded(FairDivError):
    exit_code = 2


class ClassMismatch(FairDivError):
    exit_code = 3


class NotFactored(ClassMismatch):
    pass


class NonIntegerRatio(ClassMismatch):
    """Personalized bivalued rows whose large/small ratio is not an integer."""


class InvariantViolation(FairDivError):
    exit_code = 4


# ── kinds and classes ───────────────────────────────────────────────────
class Kind(str, Enum):
    GOODS  = "goods"
    CHORES = "chores"

    @property
    def sign(self) -> int:
        return 1 if self is Kind.GOODS else -1


class ClassTag(str, Enum):
    BINARY                         = "binary"
    BIVALUED                       = "bivalued"
    FACTORED_BIVALUED              = "factored-bivalued"
    PERSONALIZED_BIVALUED          = "personalized-bivalued"
    FACTORED_PERSONALIZED_BIVALUED = "factored-personalized-bivalued"
    FACTORED                       = "factored"
    WEAKLY_LEXICOGRAPHIC           = "wolex"
    GENERAL_ADDITIVE               = "general"


@dataclass(frozen=True)
class UtilityClass:
    """A class tag plus its parameters: (a, b) for bivalued tags, one (a_i, b_i)
    pair per agent for the personalized tags, nothing otherwise."""
    tag: ClassTag
    params: tuple = ()

    def __str__(self):
        return f"{self.tag.value}{self.params}" if self.params else self.tag.value


def tags(classes: Iterable[UtilityClass]) -> frozenset:
    return frozenset(c.tag for c in classes)


# ── instance ────────────────────────────────────────────────────────────
@dataclass(frozen=True)
class Instance:
    kind: Kind
    valuations: tuple
    agents: tuple = ()
    items: tuple = ()

    def __post_init__(self):
        try:
            kind = Kind(self.kind)
        except ValueError:
            raise InstanceError(f"unknown kind {self.kind!r}") from None
        rows = tuple(tuple(r) for r in self.valuations)
        if not rows:
            raise InstanceError("instance needs at least one agent")
        m = len(rows[0])
        if any(len(r) != m for r in rows):
            raise InstanceError("ragged valuation rows")
        for r in rows:
            for x in r:
                if isinstance(x, bool) or not isinstance(x, (int, Fraction)):
                    raise InstanceError(f"valuation {x!r} is not an exact integer")
        if any(x * kind.sign < 0 for r in rows for x in r):
            raise MixedSigns(f"{kind.value} instance holds a value of the wrong sign")
        agents = tuple(self.agents) or tuple(f"a{i + 1}" for i in range(len(rows)))
        items  = tuple(self.items) or tuple(f"c{j + 1}" for j in range(m))
        if len(agents) != len(rows) or len(items) != m:
            raise InstanceError("agent/item names do not match the valuation matrix")
        if len(set(agents)) != len(agents) or len(set(items)) != len(items):
            raise InstanceError("agent and item names must be unique")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "valuations", rows)
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "items", items)

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def m(self) -> int:
        return len(self.valuations[0])

    def value(self, i: int, bundle: Iterable[int]) -> Value:
        row = self.valuations[i]
        return sum((row[r] for r in bundle), 0)

    def utilities(self, alloc: "PartialAllocation") -> tuple:
        return tuple(self.value(i, b) for i, b in enumerate(alloc.bundles))

    def restrict(self, agents: Sequence[int], items: Sequence[int]) -> "Instance":
        """Sub-instance on the given agents and items, names carried along."""
        return Instance(self.kind,
                        tuple(tuple(self.valuations[i][r] for r in items) for i in agents),
                        tuple(self.agents[i] for i in agents),
                        tuple(self.items[r] for r in items))


# ── allocations ─────────────────────────────────────────────────────────
@dataclass(frozen=True)
class PartialAllocation:
    bundles: tuple

    def __post_init__(self):
        bundles = tuple(frozenset(b) for b in self.bundles)
        seen = set()
        for b in bundles:
            if any(not isinstance(r, int) or r < 0 for r in b):
                raise InstanceError("bundles hold item indices")
            if seen & b:
                raise InstanceError(f"item(s) {sorted(seen & b)} sit in two bundles")
            seen |= b
        object.__setattr__(self, "bundles", bundles)

    @property
    def n(self) -> int:
        return len(self.bundles)

    @property
    def assigned(self) -> frozenset:
        return frozenset().union(*self.bundles)

    def owner_of(self, r: int):
        for i, b in enumerate(self.bundles):
            if r in b:
                return i
        return None


@dataclass(frozen=True)
class Allocation(PartialAllocation):
    m: int

    def __post_init__(self):
        super().__post_init__()
        if self.assigned != frozenset(range(self.m)):
            raise InstanceError("bundles do not cover every item exactly once")

    @classmethod
    def from_owners(cls, owners: Sequence[int], n: int) -> "Allocation":
        bundles = [set() for _ in range(n)]
        for r, i in enumerate(owners):
            if not 0 <= i < n:
                raise InstanceError(f"item {r} assigned to unknown agent {i}")
            bundles[i].add(r)
        return cls(tuple(bundles), len(owners))

    def owners(self) -> tuple:
        own = [0] * self.m
        for i, b in enumerate(self.bundles):
            for r in b:
                own[r] = i
        return tuple(own)


def check_allocation(inst: Instance, alloc: PartialAllocation):
    if alloc.n != inst.n or (isinstance(alloc, Allocation) and alloc.m != inst.m) \
            or any(r >= inst.m for r in alloc.assigned):
        raise InstanceError(f"allocation for {alloc.n} agents does not fit "
                            f"an instance with n={inst.n}, m={inst.m}")


# ── row predicates ──────────────────────────────────────────────────────
def magnitudes(row: Sequence[Value]) -> list:
    """Distinct nonzero |values|, ascending."""
    return sorted({abs(x) for x in row if x})


def is_factored_row(row: Sequence[Value]) -> bool:
    mags = magnitudes(row)
    return all(b % a == 0 for a, b in zip(mags, mags[1:]))


def is_wolex_row(row: Sequence[Value]) -> bool:
    if any(x == 0 for x in row):
        return False
    lower = 0
    for mag in magnitudes(row):
        if mag <= lower:
            return False
        lower += mag * sum(1 for x in row if abs(x) == mag)
    return True


def tier_ranks(row: Sequence[Value]) -> tuple:
    """Per item, its tier counted from the top (largest |value| → 1)."""
    top = magnitudes(row)[::-1]
    rank = {mag: h for h, mag in enumerate(top, 1)}
    return tuple(rank.get(abs(x), len(top) + 1) for x in row)


def _pair(mags: list, sign: int) -> tuple:
    if len(mags) == 2:
        return sign * mags[0], sign * mags[1]
    a = mags[0] if mags else 1
    return sign * a, sign * 2 * a


def classify(inst: Instance) -> frozenset:
    """Every class tag the instance satisfies; the tags overlap."""
    sign = inst.kind.sign
    rows = inst.valuations
    out = {UtilityClass(ClassTag.GENERAL_ADDITIVE)}
    values = {x for r in rows for x in r}
    if values <= {0, sign}:
        out.add(UtilityClass(ClassTag.BINARY))
    if 0 not in values:
        common = sorted({abs(x) for x in values})
        if len(common) <= 2:
            a, b = _pair(common, sign)
            out.add(UtilityClass(ClassTag.BIVALUED, (a, b)))
            if b % a == 0:
                out.add(UtilityClass(ClassTag.FACTORED_BIVALUED, (a, b)))
        per_row = [magnitudes(r) for r in rows]
        if all(len(ms) <= 2 for ms in per_row):
            pairs = tuple(_pair(ms, sign) for ms in per_row)
            out.add(UtilityClass(ClassTag.PERSONALIZED_BIVALUED, pairs))
            if all(b % a == 0 for a, b in pairs):
                out.add(UtilityClass(ClassTag.FACTORED_PERSONALIZED_BIVALUED, pairs))
    if all(is_factored_row(r) for r in rows):
        out.add(UtilityClass(ClassTag.FACTORED))
    if all(is_wolex_row(r) for r in rows):
        out.add(UtilityClass(ClassTag.WEAKLY_LEXICOGRAPHIC))
    return frozenset(out)


# ── bivalued chores normal form ─────────────────────────────────────────
class Normalized(NamedTuple):
    instance: Instance
    scales: tuple
    p: Fraction


def _exact(q: Fraction) -> Value:
    return q.numerator if q.denominator == 1 else q


def normalize_bivalued_chores(inst: Instance) -> Normalized:
    """Scale each row into {-1, -p}, with one p shared by all agents.

    Rows using a single value become all -1. v_i(r) = scales[i] * v'_i(r).
    """
    if inst.kind is not Kind.CHORES:
        raise ClassMismatch("bivalued normal form is defined for chores only")
    if any(x == 0 for r in inst.valuations for x in r):
        raise ZeroValuation("bivalued chores cannot carry zero valuations")
    ratio, lows = None, []
    for i, row in enumerate(inst.valuations):
        mags = magnitudes(row)
        if len(mags) > 2:
            raise ClassMismatch(f"agent {inst.agents[i]} uses {len(mags)} distinct values")
        if len(mags) == 2:
            r = Fraction(mags[1]) / mags[0]
            if ratio is not None and r != ratio:
                raise ClassMismatch(f"bivalue ratios differ ({ratio} vs {r})")
            ratio = r
        lows.append(mags[0] if mags else 1)
    p = ratio if ratio is not None else Fraction(2)
    rows = tuple(tuple(_exact(Fraction(x) / low) for x in row)
                 for row, low in zip(inst.valuations, lows))
    return Normalized(Instance(inst.kind, rows, inst.agents, inst.items), tuple(lows), p)


# ── ordered instances ───────────────────────────────────────────────────
@dataclass(frozen=True)
class OrderedView:
    """perms[i][t] is the original item at agent i's t-th ordered position."""
    base: Instance
    perms: tuple

    @property
    def instance(self) -> Instance:
        rows = tuple(tuple(row[r] for r in perm)
                     for row, perm in zip(self.base.valuations, self.perms))
        return Instance(self.base.kind, rows, self.base.agents,
                        tuple(f"#{t + 1}" for t in range(self.base.m)))


def order_instance(inst: Instance) -> OrderedView:
    perms = tuple(tuple(sorted(range(inst.m), key=lambda r, row=row: (-abs(row[r]), r)))
                  for row in inst.valuations)
    return OrderedView(inst, perms)


def is_ordered(inst: Instance) -> bool:
    return all(abs(a) >= abs(b) for row in inst.valuations for a, b in zip(row, row[1:]))


def lift_allocation(view: OrderedView, ordered_alloc: Allocation) -> Allocation:
    """Turn an allocation of the ordered instance into one of the original.

    The holder of each ordered position picks its most valuable remaining
    original item (lowest index on ties). Goods walk positions first to last,
    chores last to first; either way nobody ends up worse than in the ordered
    allocation.
    """
    base = view.base
    if not isinstance(ordered_alloc, Allocation):
        raise InstanceError("lifting needs a complete allocation")
    check_allocation(base, ordered_alloc)
    holder = ordered_alloc.owners()
    walk = range(base.m) if base.kind is Kind.GOODS else range(base.m - 1, -1, -1)
    left = set(range(base.m))
    owners = [0] * base.m
    for t in walk:
        row = base.valuations[holder[t]]
        pick = max(left, key=lambda r: (row[r], -r))
        left.remove(pick)
        owners[pick] = holder[t]
    return Allocation.from_owners(owners, base.n)


def canonicalize_wolex(inst: Instance) -> Instance:
    """Rewrite each row so tier r (from the bottom, r = 0) is worth sign * m^r.

    Bundle comparisons are unchanged for every agent.
    """
    bad = [inst.agents[i] for i, row in enumerate(inst.valuations) if not is_wolex_row(row)]
    if bad:
        raise ClassMismatch(f"not weakly lexicographic for {', '.join(bad)}")
    sign, m = inst.kind.sign, inst.m
    rows = []
    for row in inst.valuations:
        bottom = {mag: r for r, mag in enumerate(magnitudes(row))}
        rows.append(tuple(sign * m ** bottom[abs(x)] for x in row))
    return Instance(inst.kind, tuple(rows), inst.agents, inst.items)


# ── documents ───────────────────────────────────────────────────────────
def _doc(text_or_doc):
    if isinstance(text_or_doc, dict):
        return text_or_doc
    try:
        doc = json.loads(text_or_doc)
    except json.JSONDecodeError as e:
        raise InstanceError(f"not a JSON document: {e}") from None
    if not isinstance(doc, dict):
        raise InstanceError("document must be a JSON object")
    return doc


def parse_instance(text) -> Instance:
    doc = _doc(text)
    rows = doc.get("valuations")
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise InstanceError("'valuations' must be a list of rows")
    if not rows:
        raise InstanceError("empty agent set")
    for r in rows:
        for x in r:
            if isinstance(x, bool) or not isinstance(x, int):
                raise InstanceError(f"valuation {x!r} is not an integer")
    kind = doc.get("kind")
    if kind is None:
        pos = any(x > 0 for r in rows for x in r)
        neg = any(x < 0 for r in rows for x in r)
        if pos and neg:
            raise MixedSigns("valuations mix goods and chores")
        kind = Kind.CHORES if neg else Kind.GOODS
    return Instance(kind, rows, tuple(doc.get("agents") or ()), tuple(doc.get("items") or ()))


def _num(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else str(x)
    return x


def instance_to_doc(inst: Instance) -> dict:
    return {"kind": inst.kind.value,
            "agents": list(inst.agents),
            "items": list(inst.items),
            "valuations": [[_num(x) for x in r] for r in inst.valuations]}


def allocation_to_doc(inst: Instance, alloc: PartialAllocation, certificates: dict = None) -> dict:
    check_allocation(inst, alloc)
    doc = {"bundles": {inst.agents[i]: [inst.items[r] for r in sorted(b)]
                       for i, b in enumerate(alloc.bundles)}}
    if certificates is not None:
        doc["certificates"] = certificates
    return doc


def parse_allocation(text, inst: Instance) -> Allocation:
    doc = _doc(text)
    bundles = doc.get("bundles")
    if not isinstance(bundles, dict):
        raise InstanceError("'bundles' must map agent names to item lists")
    agent_ix = {a: i for i, a in enumerate(inst.agents)}
    item_ix = {c: r for r, c in enumerate(inst.items)}
    out = [set() for _ in range(inst.n)]
    for name, items in bundles.items():
        if name not in agent_ix:
            raise InstanceError(f"unknown agent {name!r}")
        for c in items:
            if c not in item_ix:
                raise InstanceError(f"unknown item {c!r}")
            out[agent_ix[name]].add(item_ix[c])
    return Allocation(tuple(out), inst.m)


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2)
