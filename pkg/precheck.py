"""Cheap irreducibility certificates run before factorization."""

import logging
from enum import StrEnum
from typing import Hashable, Iterable

import numpy as np
from pydantic import BaseModel, Field

from errors import PreconditionError
from polynomial import Polynomial, bit_matrix, format_polynomial, strip_trivial_divisors

logger = logging.getLogger(__name__)


class Verdict(StrEnum):
    certified_irreducible = "certified_irreducible"
    inconclusive = "inconclusive"


class UnionFind:
    """Union by rank with path compression."""

    def __init__(self, items: Iterable[Hashable]):
        self._leader = {s: s for s in items}
        self._rank = {s: 0 for s in self._leader}
        self.n_clusters = len(self._leader)

    def find(self, s: Hashable) -> Hashable:
        root = s
        while self._leader[root] != root:
            root = self._leader[root]
        while self._leader[s] != root:
            self._leader[s], s = root, self._leader[s]
        return root

    def union(self, a: Hashable, b: Hashable) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._rank[ra] < self._rank[rb]:
            ra, rb = rb, ra
        self._leader[rb] = ra
        if self._rank[ra] == self._rank[rb]:
            self._rank[ra] += 1
        self.n_clusters -= 1

    def groups(self) -> list[list[Hashable]]:
        clusters: dict[Hashable, list[Hashable]] = {}
        for s in self._leader:
            clusters.setdefault(self.find(s), []).append(s)
        return list(clusters.values())


class PrecheckReport(BaseModel):
    trivial_divisors: list[str] = Field(default_factory=list)
    monomial_count: int
    mu: dict[str, int]
    gcd_condition_holds: bool
    cooccurrence_classes: list[list[str]]
    verdict: Verdict


def _occurrence_counts(F: Polynomial) -> np.ndarray:
    return bit_matrix(F.monomials, len(F.vars)).sum(axis=0, dtype=np.int64)


def gcd_condition(F: Polynomial) -> tuple[bool, dict[str, int]]:
    """Necessary condition for factorability: gcd(mu_x, M) > 1 for every x."""
    if F.is_constant():
        raise PreconditionError("gcd condition needs a non-constant polynomial")
    counts = _occurrence_counts(F)
    positions = np.asarray(F.variables(), dtype=np.int64)
    mu = {F.vars.names[int(i)]: int(counts[i]) for i in positions}
    holds = bool(np.all(np.gcd(counts[positions], F.monomial_count) > 1))
    return holds, mu


def cooccurrence_classes(F: Polynomial) -> list[list[int]]:
    """Union of variables that never share a monomial; each class lies in one factor."""
    positions = F.variables()
    if not positions:
        return []
    bits = bit_matrix(F.monomials, len(F.vars))[:, positions].astype(np.float32)
    together = bits.T @ bits
    uf = UnionFind(positions)
    for i, j in np.argwhere(np.triu(together == 0, k=1)):
        uf.union(positions[i], positions[j])
    return sorted(sorted(group) for group in uf.groups())


def certify(core: Polynomial) -> tuple[bool, dict[str, int], list[list[int]], Verdict]:
    holds, mu = gcd_condition(core)
    classes = cooccurrence_classes(core)
    if not holds or (len(classes) == 1 and len(classes[0]) >= 2):
        verdict = Verdict.certified_irreducible
    else:
        verdict = Verdict.inconclusive
    logger.debug("precheck: gcd condition %s, %d classes -> %s", holds, len(classes), verdict)
    return holds, mu, classes, verdict


def precheck(F: Polynomial) -> PrecheckReport:
    """Strip trivial divisors, then run both conditions on the core."""
    if F.is_constant():
        raise PreconditionError("Precheck needs a non-constant polynomial")
    trivial, core = strip_trivial_divisors(F)
    divisors = [format_polynomial(t) for t in trivial]
    if core.is_constant():
        return PrecheckReport(
            trivial_divisors=divisors,
            monomial_count=core.monomial_count,
            mu={},
            gcd_condition_holds=True,
            cooccurrence_classes=[],
            verdict=Verdict.inconclusive,
        )
    holds, mu, classes, verdict = certify(core)
    return PrecheckReport(
        trivial_divisors=divisors,
        monomial_count=core.monomial_count,
        mu=mu,
        gcd_condition_holds=holds,
        cooccurrence_classes=[F.vars.names_of(F.vars.mask_of(c)) for c in classes],
        verdict=verdict,
    )
