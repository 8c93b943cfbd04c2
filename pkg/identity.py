"""Recursive test of A*D = B*C that never forms the products.

Each level normalizes away variables dividing the parameters, settles the
constant cases, falls back to direct multiplication under a size cutoff, and
otherwise splits on a pivot z into the z=0 part, the derivative part and two
cross identities selected by a multiplier Q1*Q2.
"""

import threading
from dataclasses import dataclass
from enum import StrEnum
from typing import NamedTuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from errors import CallBudgetExceeded, PreconditionError
from polynomial import (
    Polynomial,
    bit_matrix,
    check_same_table,
    iter_bits,
    length,
    products_equal,
)
from utils import ensure_recursion_limit


class Param(StrEnum):
    A = "A"
    D = "D"
    B = "B"
    C = "C"


class PivotRule(StrEnum):
    balanced_median = "balanced_median"
    first_available = "first_available"


# the multiplier Q1*Q2 drops the diagonal partner of Q from both cross identities
PARTNER = {Param.A: Param.D, Param.D: Param.A, Param.B: Param.C, Param.C: Param.B}


class RecursionStats:
    """Thread-safe counters for IsEqual calls, depth and cutoff hits."""

    def __init__(self):
        self._lock = threading.Lock()
        self.calls = 0
        self.max_depth = 0
        self.cutoff_hits = 0

    def record_call(self, depth: int) -> None:
        with self._lock:
            self.calls += 1
            if depth > self.max_depth:
                self.max_depth = depth

    def record_cutoff(self) -> None:
        with self._lock:
            self.cutoff_hits += 1

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return {
                "calls": self.calls,
                "max_depth": self.max_depth,
                "cutoff_hits": self.cutoff_hits,
            }


class IsEqualConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    cutoff_length: int = Field(default=512, ge=0)
    pivot_rule: PivotRule = PivotRule.balanced_median
    recursion_stats: RecursionStats | None = None


@dataclass(frozen=True, slots=True)
class Quad:
    """The query A*D = B*C."""

    a: Polynomial
    d: Polynomial
    b: Polynomial
    c: Polynomial

    def get(self, tag: Param) -> Polynomial:
        return {Param.A: self.a, Param.D: self.d, Param.B: self.b, Param.C: self.c}[tag]


class Part(NamedTuple):
    param: Param
    index: int  # 1 = derivative on z, 2 = evaluation z=0


class CrossIdentity(NamedTuple):
    """IsEqual arguments (a, d, b, c) for X1*Y2 = X2*Y1."""

    a: Part
    d: Part
    b: Part
    c: Part

    @classmethod
    def of(cls, x: Param, y: Param) -> "CrossIdentity":
        return cls(Part(x, 1), Part(y, 2), Part(x, 2), Part(y, 1))

    def __str__(self) -> str:
        return f"{self.a.param}1*{self.d.param}2 = {self.b.param}2*{self.c.param}1"


_MULTIPLIER_ROWS = {
    Param.A: (CrossIdentity.of(Param.A, Param.C), CrossIdentity.of(Param.A, Param.B)),
    Param.B: (CrossIdentity.of(Param.B, Param.D), CrossIdentity.of(Param.A, Param.B)),
    Param.C: (CrossIdentity.of(Param.C, Param.D), CrossIdentity.of(Param.A, Param.C)),
    Param.D: (CrossIdentity.of(Param.C, Param.D), CrossIdentity.of(Param.B, Param.D)),
}


def subidentities_for(tag: Param) -> tuple[CrossIdentity, CrossIdentity]:
    return _MULTIPLIER_ROWS[Param(tag)]


def select_pivot(
    q: Quad, rule: PivotRule = PivotRule.balanced_median
) -> tuple[Param, int]:
    sizes = {tag: length(q.get(tag)) for tag in Param}
    candidates = [tag for tag in Param if not q.get(tag).is_constant()]
    if not candidates:
        raise PreconditionError("All four parameters are constant")

    # prefer the Q whose table row leaves out the largest parameter
    tag = max(candidates, key=lambda t: sizes[PARTNER[t]])
    support = q.get(tag).support()
    if rule is PivotRule.first_available:
        return tag, next(iter_bits(support))

    largest = q.get(max(Param, key=lambda t: sizes[t]))
    derived, evaluated = largest.split_lengths()
    positions = np.flatnonzero(bit_matrix([support], len(largest.vars))[0])
    imbalance = np.abs(derived[positions] - evaluated[positions])
    return tag, int(positions[int(np.argmin(imbalance))])


def is_equal(
    q: Quad, cfg: IsEqualConfig | None = None, max_calls: int | None = None
) -> bool:
    """Decide A*D = B*C.

    With `max_calls`, raises CallBudgetExceeded once the recursion makes more
    calls than that; a returned verdict is always exact.
    """
    cfg = cfg or IsEqualConfig()
    check_same_table(q.a, q.d, q.b, q.c)
    stats = cfg.recursion_stats
    cutoff = cfg.cutoff_length
    rule = cfg.pivot_rule
    ensure_recursion_limit(len(q.a.vars))
    calls = 0

    def recurse(
        a: Polynomial, d: Polynomial, b: Polynomial, c: Polynomial, depth: int
    ) -> bool:
        nonlocal calls
        calls += 1
        if max_calls is not None and calls > max_calls:
            raise CallBudgetExceeded(max_calls)
        if stats is not None:
            stats.record_call(depth)

        if a.is_zero() or d.is_zero():
            return b.is_zero() or c.is_zero()
        if b.is_zero() or c.is_zero():
            return False

        # z-multiplicity of the divisors must agree on both sides
        da, dd = a.common_divisor_mask(), d.common_divisor_mask()
        db, dc = b.common_divisor_mask(), c.common_divisor_mask()
        if da ^ dd != db ^ dc or da & dd != db & dc:
            return False
        a, d, b, c = a.primitive(), d.primitive(), b.primitive(), c.primitive()

        a1, d1, b1, c1 = a.is_one(), d.is_one(), b.is_one(), c.is_one()
        if a1 and d1:
            return b1 and c1
        if b1 and c1:
            return False
        if a1 and b1:
            return d == c
        if d1 and c1:
            return a == b
        if a1 and c1:
            return d == b
        if d1 and b1:
            return a == c
        # a shared nonzero parameter cancels
        if a == b:
            return d == c
        if a == c:
            return d == b
        if d == b:
            return a == c
        if d == c:
            return a == b

        # degree in every variable must agree as well
        sa, sd, sb, sc = a.support(), d.support(), b.support(), c.support()
        if sa ^ sd != sb ^ sc or sa & sd != sb & sc:
            return False

        if length(a) + length(d) + length(b) + length(c) <= cutoff:
            if stats is not None:
                stats.record_cutoff()
            return products_equal(a, d, b, c)

        tag, z = select_pivot(Quad(a, d, b, c), rule)
        (a_1, a_2), (d_1, d_2) = a.pivot_parts(z), d.pivot_parts(z)
        (b_1, b_2), (c_1, c_2) = b.pivot_parts(z), c.pivot_parts(z)
        if not recurse(a_2, d_2, b_2, c_2, depth + 1):
            return False
        if not recurse(a_1, d_1, b_1, c_1, depth + 1):
            return False
        parts = {
            Part(Param.A, 1): a_1, Part(Param.A, 2): a_2,
            Part(Param.D, 1): d_1, Part(Param.D, 2): d_2,
            Part(Param.B, 1): b_1, Part(Param.B, 2): b_2,
            Part(Param.C, 1): c_1, Part(Param.C, 2): c_2,
        }
        return any(
            recurse(*(parts[p] for p in identity), depth + 1)
            for identity in subidentities_for(tag)
        )

    return recurse(q.a, q.d, q.b, q.c, 0)
