"""Deterministic random instances (PCG64 via numpy), optionally planted products."""

import logging
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import PreconditionError
from factorizer import splits_along
from polynomial import Polynomial, VarTable, masks_from_bits, product_of, strip_trivial_divisors
from precheck import Verdict, certify

logger = logging.getLogger(__name__)

PRNG_ALGORITHM = "PCG64"
MAX_ATTEMPTS = 1000
# parts up to this many variables fall back to an exhaustive split search
EXHAUSTIVE_MAX_VARS = 10


class GenSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=1)
    m: int = Field(ge=1)
    p: float = Field(default=0.5, gt=0.0, lt=1.0)
    seed: int = Field(default=0, ge=0, lt=2**64)
    planted: tuple[int, int, int, int] | None = None
    name: str | None = None

    @model_validator(mode="after")
    def check_sizes(self) -> "GenSpec":
        if self.planted is not None:
            n1, m1, n2, m2 = self.planted
            if min(n1, n2) < 2 or min(m1, m2) < 2:
                raise ValueError("Planted parts need at least 2 variables and 2 monomials")
            if n1 + n2 != self.n:
                raise ValueError(f"Planted variable counts {n1}+{n2} differ from n={self.n}")
            if m1 * m2 != self.m:
                raise ValueError(f"Planted monomial counts {m1}*{m2} differ from M={self.m}")
            if m1 > 2**n1 or m2 > 2**n2:
                raise ValueError("Planted part asks for more monomials than exist")
        elif self.m > 2**self.n:
            raise ValueError(f"M={self.m} exceeds the {2**self.n} monomials over {self.n} variables")
        return self

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        planted = "x".join(map(str, self.planted)) if self.planted else "random"
        return f"n{self.n}-m{self.m}-p{self.p:g}-s{self.seed}-{planted}"


@dataclass
class GeneratedInstance:
    spec: GenSpec
    polynomial: Polynomial
    parts: list[Polynomial] = field(default_factory=list)

    def planted_partition(self) -> list[int]:
        return [part.support() for part in self.parts]


def variable_table(n: int) -> VarTable:
    width = len(str(n - 1))
    return VarTable((f"x{i:0{width}d}" for i in range(n)), sort=False)


def _sample_masks(rng: np.random.Generator, n: int, count: int, p: float, offset: int) -> list[int]:
    bits = rng.random((count, n)) < p
    return [mask << offset for mask in masks_from_bits(bits)]


def certified_irreducible(F: Polynomial) -> bool:
    """Whether F, free of trivial divisors, provably has no nontrivial split."""
    _, _, classes, verdict = certify(F)
    if verdict is Verdict.certified_irreducible:
        return True
    if F.support().bit_count() > EXHAUSTIVE_MAX_VARS:
        return False
    # every factor is a union of co-occurrence classes; the first class stays put
    masks = [F.vars.mask_of(group) for group in classes]
    first, rest = masks[0], masks[1:]
    for choice in range(2 ** len(rest)):
        same = first
        for i, mask in enumerate(rest):
            if choice >> i & 1:
                same |= mask
        if splits_along(F, same):
            return False
    return True


def _random_part(
    rng: np.random.Generator,
    vars: VarTable,
    n: int,
    m: int,
    p: float,
    offset: int = 0,
    irreducible: bool = False,
) -> Polynomial:
    """M distinct masks over n variables starting at `offset`, no trivial divisors."""
    for _ in range(MAX_ATTEMPTS):
        masks: set[int] = set()
        while len(masks) < m:
            masks.update(_sample_masks(rng, n, m - len(masks), p, offset))
        F = Polynomial(vars, tuple(sorted(masks)))
        # resample single monomials until no variable or x+1 divides F
        for _ in range(MAX_ATTEMPTS):
            trivial, _ = strip_trivial_divisors(F)
            if not trivial:
                break
            victim = int(rng.integers(len(F.monomials)))
            replacement = _sample_masks(rng, n, 1, p, offset)[0]
            if replacement in F.monomials:
                continue
            kept = [mask for i, mask in enumerate(F.monomials) if i != victim]
            F = Polynomial(vars, tuple(sorted(kept + [replacement])))
        else:
            continue
        if F.support().bit_count() < 2:
            continue
        # planted parts must be certified irreducible so the ground truth is exact
        if irreducible and not certified_irreducible(F):
            continue
        return F
    raise PreconditionError(f"Could not sample a suitable polynomial (n={n}, M={m}, p={p})")


def generate_instance(spec: GenSpec) -> GeneratedInstance:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    vars = variable_table(spec.n)
    if spec.planted is None:
        F = _random_part(rng, vars, spec.n, spec.m, spec.p)
        return GeneratedInstance(spec=spec, polynomial=F)
    n1, m1, n2, m2 = spec.planted
    first = _random_part(rng, vars, n1, m1, spec.p, offset=0, irreducible=True)
    second = _random_part(rng, vars, n2, m2, spec.p, offset=n1, irreducible=True)
    F = product_of([first, second])
    logger.debug("planted %s: %d monomials", spec.label, F.monomial_count)
    return GeneratedInstance(spec=spec, polynomial=F, parts=[first, second])


def generate(spec: GenSpec) -> Polynomial:
    return generate_instance(spec).polynomial
