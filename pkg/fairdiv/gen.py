"""
fairdiv/gen.py
Seeded random instances for every utility class.

The random source is Python's random.Random (Mersenne Twister MT19937)
seeded with GenSpec.seed, so a spec always yields the same instance.
"""

from __future__ import annotations

# ── stdlib
import random
from dataclasses import dataclass
from typing import Optional

# ── local
from fairdiv.core import (ClassTag, Instance, InstanceError, InvariantViolation, Kind, classify,
                          tags)

NEEDS_FACTOR = (ClassTag.FACTORED_BIVALUED, ClassTag.FACTORED_PERSONALIZED_BIVALUED)


@dataclass(frozen=True)
class GenSpec:
    cls: ClassTag
    kind: Kind
    n: int
    m: int
    seed: int = 0
    p: Optional[int] = None        # bivalue ratio; drawn from p_range when unset
    p_range: tuple = (2, 4)
    tiers: Optional[int] = None    # weakly lexicographic tier count
    max_value: int = 9


def _check(spec: GenSpec):
    if spec.n < 1 or spec.m < 0:
        raise InstanceError(f"infeasible spec: n={spec.n}, m={spec.m}")
    if spec.p is not None and spec.p < 2:
        raise InstanceError(f"infeasible spec: ratio p={spec.p} must be at least 2")
    if spec.tiers is not None and not (spec.m == 0 == spec.tiers or 1 <= spec.tiers <= spec.m):
        raise InstanceError(f"infeasible spec: {spec.tiers} tiers over {spec.m} items")
    if spec.p_range[0] < 2 or spec.p_range[0] > spec.p_range[1]:
        raise InstanceError(f"infeasible spec: p_range {spec.p_range}")


def _ratio(spec: GenSpec, rng: random.Random) -> int:
    return spec.p if spec.p is not None else rng.randint(*spec.p_range)


def _wolex_row(spec: GenSpec, rng: random.Random) -> list:
    m = spec.m
    if m == 0:
        return []
    k = spec.tiers or rng.randint(1, min(m, 4))
    order = list(range(m))
    rng.shuffle(order)
    tier = [0] * m
    for idx, r in enumerate(order):
        tier[r] = idx if idx < k else rng.randrange(k)
    counts = [tier.count(t) for t in range(k)]
    mags, lower = [0] * k, 0
    for t in range(k - 1, -1, -1):            # tier 0 is the top tier
        mags[t] = lower + rng.randint(1, 3)
        lower += mags[t] * counts[t]
    return [mags[tier[r]] for r in range(m)]


def _factored_row(spec: GenSpec, rng: random.Random) -> list:
    chain = [rng.randint(1, 3)]
    for _ in range(rng.randint(0, 2)):
        chain.append(chain[-1] * rng.randint(2, 4))
    pool = chain + ([0] if rng.random() < 0.3 else [])
    return [rng.choice(pool) for _ in range(spec.m)]


def generate(spec: GenSpec) -> Instance:
    _check(spec)
    kind = Kind(spec.kind)
    rng = random.Random(spec.seed)
    rows = []
    if spec.cls is ClassTag.BIVALUED:
        if spec.p is not None:
            a, b = 1, spec.p
        else:
            a = rng.randint(1, 3)
            b = a + rng.randint(1, 4)
        rows = [[rng.choice((a, b)) for _ in range(spec.m)] for _ in range(spec.n)]
    elif spec.cls is ClassTag.FACTORED_BIVALUED:
        a = rng.randint(1, 3)
        b = a * _ratio(spec, rng)
        rows = [[rng.choice((a, b)) for _ in range(spec.m)] for _ in range(spec.n)]
    elif spec.cls in (ClassTag.PERSONALIZED_BIVALUED, ClassTag.FACTORED_PERSONALIZED_BIVALUED):
        for _ in range(spec.n):
            a = rng.randint(1, 3)
            b = a * _ratio(spec, rng) if spec.cls in NEEDS_FACTOR else a + rng.randint(1, 5)
            rows.append([rng.choice((a, b)) for _ in range(spec.m)])
    elif spec.cls is ClassTag.FACTORED:
        rows = [_factored_row(spec, rng) for _ in range(spec.n)]
    elif spec.cls is ClassTag.WEAKLY_LEXICOGRAPHIC:
        rows = [_wolex_row(spec, rng) for _ in range(spec.n)]
    elif spec.cls is ClassTag.BINARY:
        rows = [[rng.randint(0, 1) for _ in range(spec.m)] for _ in range(spec.n)]
    else:
        rows = [[rng.randint(0, spec.max_value) for _ in range(spec.m)] for _ in range(spec.n)]
    inst = Instance(kind, tuple(tuple(kind.sign * x for x in r) for r in rows))
    if spec.cls not in tags(classify(inst)):
        raise InvariantViolation(f"generated instance is not {spec.cls.value} (seed {spec.seed})")
    return inst
