import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from typing import Callable

from pydantic import BaseModel, ConfigDict, Field

from errors import CallBudgetExceeded, FactorizationDefect, PreconditionError
from identity import IsEqualConfig, Quad, is_equal
from polynomial import (
    Polynomial,
    VarTable,
    check_same_table,
    derivative,
    evaluate,
    iter_bits,
    multiply,
    product_of,
    projection,
    strip_trivial_divisors,
)
from precheck import Verdict, certify
from utils import worker_count

logger = logging.getLogger(__name__)

# (y, same_as_pivot, seconds)
ClassificationHook = Callable[[int, bool, float], None]
GcdFunction = Callable[[Polynomial, Polynomial], Polynomial]


class Driver(StrEnum):
    fd = "fd"
    modfd = "modfd"
    gcd = "gcd"


class OuterPivot(StrEnum):
    lowest = "lowest"
    highest = "highest"


class FactorConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    driver: Driver = Driver.modfd
    is_equal: IsEqualConfig = Field(default_factory=IsEqualConfig)
    threads: int = Field(default=1, ge=1)
    # multiply-back verification runs up to this many input monomials
    verify_limit: int = Field(default=1_000_000, ge=0)
    precheck: bool = False
    pivot: OuterPivot = OuterPivot.lowest
    # initial IsEqual call cap per classification; 0 runs every check to the end
    call_budget: int = Field(default=256, ge=0)


@dataclass(frozen=True, slots=True)
class VariablePartition:
    pivot: int
    sigma_same: int
    sigma_other: int

    @property
    def factorable(self) -> bool:
        return self.sigma_other != 0


@dataclass(slots=True)
class Factorization:
    factors: list[Polynomial] = field(default_factory=list)
    trivial: list[Polynomial] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.factors) + len(self.trivial)

    @property
    def factorable(self) -> bool:
        return self.count >= 2

    def all_factors(self) -> list[Polynomial]:
        return self.trivial + self.factors

    def product(self, vars: VarTable) -> Polynomial:
        return product_of(self.all_factors(), vars)


def _pick_pivot(F: Polynomial, rule: OuterPivot) -> int:
    variables = F.variables()
    return variables[0] if rule is OuterPivot.lowest else variables[-1]


def _check_partition_input(F: Polynomial, x: int | str) -> int:
    x = F.vars.position(x)
    support = F.support()
    if not support >> x & 1:
        raise PreconditionError(f"Pivot {F.vars.names[x]!r} does not occur in the polynomial")
    if support.bit_count() < 2:
        raise PreconditionError("Partition needs at least two variables")
    if F.common_divisor_mask():
        raise PreconditionError("Polynomial has a variable divisor; strip trivial divisors first")
    return x


def _mask(group: list[int]) -> int:
    mask = 0
    for y in group:
        mask |= 1 << y
    return mask


def _seed_groups(
    F: Polynomial, x: int, hint: list[list[int]] | None
) -> tuple[int, list[list[int]]]:
    support = F.support()
    # one representative per co-occurrence class; the class shares its verdict
    if hint:
        groups = [[y for y in group if support >> y & 1] for group in hint]
        groups = [g for g in groups if g]
    else:
        groups = [[y] for y in iter_bits(support)]

    same, pending = 0, []
    for group in groups:
        if x in group:
            same |= _mask(group)
        else:
            pending.append(group)
    return same, pending


def _run_verdicts(
    pending: list[list[int]],
    same_as_pivot: Callable[[int], bool | None],
    threads: int,
    on_classified: ClassificationHook | None,
) -> list[bool | None]:
    def timed(group: list[int]) -> bool | None:
        start = time.perf_counter()
        verdict = same_as_pivot(group[0])
        if on_classified is not None and verdict is not None:
            on_classified(group[0], verdict, time.perf_counter() - start)
        return verdict

    workers = worker_count(threads)
    if workers > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(timed, pending))
    return [timed(group) for group in pending]


def _classify_all(
    F: Polynomial,
    x: int,
    same_as_pivot: Callable[[int], bool],
    threads: int,
    hint: list[list[int]] | None,
    on_classified: ClassificationHook | None,
) -> VariablePartition:
    same, pending = _seed_groups(F, x, hint)
    other = 0
    for group, verdict in zip(pending, _run_verdicts(pending, same_as_pivot, threads, on_classified)):
        if verdict:
            same |= _mask(group)
        else:
            other |= _mask(group)
    return VariablePartition(pivot=x, sigma_same=same, sigma_other=other)


def splits_along(F: Polynomial, same: int) -> bool:
    """Whether F = F|same * F|rest for the variables outside `same`."""
    rest = F.support() & ~same
    if not rest:
        return False
    left, right = projection(F, same), projection(F, rest)
    # a product on disjoint variables has exactly |left|*|right| monomials
    if left.monomial_count * right.monomial_count != F.monomial_count:
        return False
    return multiply(left, right) == F


def partition_fd(
    F: Polynomial,
    x: int | str,
    threads: int = 1,
    hint: list[list[int]] | None = None,
    on_classified: ClassificationHook | None = None,
) -> VariablePartition:
    """Classify y by whether d(F_{x=0} * dF/dx)/dy vanishes, forming the product."""
    x = _check_partition_input(F, x)
    G = multiply(evaluate(F, x, 0), derivative(F, x))
    return _classify_all(
        F, x, lambda y: not G.derivative(y).is_zero(), threads, hint, on_classified
    )


def partition_modfd(
    F: Polynomial,
    x: int | str,
    cfg: IsEqualConfig | None = None,
    threads: int = 1,
    hint: list[list[int]] | None = None,
    on_classified: ClassificationHook | None = None,
    call_budget: int = 0,
) -> VariablePartition:
    """Same partition as partition_fd, decided by IsEqual without the product.

    With a nonzero `call_budget`, each IsEqual run is capped at that many calls.
    Variables left undecided go to the other side as soon as F splits along
    the variables already found with the pivot; otherwise the cap grows fourfold
    and the undecided ones are retried. Either way the partition is exact.
    """
    x = _check_partition_input(F, x)
    cfg = cfg or IsEqualConfig()
    A = derivative(F, x)
    B = evaluate(F, x, 0)
    budget = call_budget or None

    def same_as_pivot(y: int) -> bool | None:
        D = derivative(B, y)
        C = derivative(A, y)
        try:
            return not is_equal(Quad(A, D, B, C), cfg, max_calls=budget)
        except CallBudgetExceeded:
            return None

    same, pending = _seed_groups(F, x, hint)
    other = 0
    while pending:
        undecided = []
        for group, verdict in zip(pending, _run_verdicts(pending, same_as_pivot, threads, on_classified)):
            if verdict is None:
                undecided.append(group)
            elif verdict:
                same |= _mask(group)
            else:
                other |= _mask(group)
        if undecided and splits_along(F, same):
            logger.debug("%d classes settled by the split of %s", len(undecided), F.vars.names[x])
            for group in undecided:
                other |= _mask(group)
            undecided = []
        if undecided:
            budget *= 4
            logger.debug("retrying %d classes with call limit %d", len(undecided), budget)
        pending = undecided
    return VariablePartition(pivot=x, sigma_same=same, sigma_other=other)


def _verify(F: Polynomial, result: Factorization, cfg: FactorConfig) -> None:
    if F.monomial_count > cfg.verify_limit:
        logger.debug("skipping multiply-back check for %d monomials", F.monomial_count)
        return
    try:
        product = result.product(F.vars)
    except PreconditionError as e:
        raise FactorizationDefect(f"Factors share variables: {e}") from e
    if product != F:
        raise FactorizationDefect("Product of factors differs from the input")


def _split_core(
    core: Polynomial,
    driver: Driver,
    cfg: FactorConfig,
    on_classified: ClassificationHook | None,
) -> list[Polynomial]:
    hint = None
    if cfg.precheck:
        _, _, hint, verdict = certify(core)
        if verdict is Verdict.certified_irreducible:
            return [core]

    factors = []
    current = core
    while True:
        if current.support().bit_count() < 2:
            factors.append(current)
            return factors
        x = _pick_pivot(current, cfg.pivot)
        if driver is Driver.fd:
            part = partition_fd(current, x, cfg.threads, hint, on_classified)
        else:
            part = partition_modfd(
                current, x, cfg.is_equal, cfg.threads, hint, on_classified, cfg.call_budget
            )
        logger.debug(
            "pivot %s: %d same, %d other",
            current.vars.names[x],
            part.sigma_same.bit_count(),
            part.sigma_other.bit_count(),
        )
        if not part.factorable:
            factors.append(current)
            return factors
        factors.append(projection(current, part.sigma_same))
        current = projection(current, part.sigma_other)


def factor_complete(
    F: Polynomial,
    driver: Driver | str | None = None,
    cfg: FactorConfig | None = None,
    on_classified: ClassificationHook | None = None,
) -> Factorization:
    cfg = cfg or FactorConfig()
    driver = Driver(driver) if driver is not None else cfg.driver
    if F.is_constant():
        raise PreconditionError("Cannot factor a constant polynomial")

    trivial, core = strip_trivial_divisors(F)
    if core.is_constant():
        factors = []
    elif driver is Driver.gcd:
        factors = factor_gcd(core, cfg=cfg).factors
    else:
        factors = _split_core(core, driver, cfg, on_classified)

    result = Factorization(factors=factors, trivial=trivial)
    _verify(F, result, cfg)
    logger.debug("%s: %d trivial, %d factors", driver, len(trivial), len(factors))
    return result


def factor_gcd(
    F: Polynomial,
    gcd_fn: GcdFunction | None = None,
    cfg: FactorConfig | None = None,
) -> Factorization:
    """GCD loop: G = gcd(F_{x=0}, dF/dx); emit F/G while G != 1."""
    cfg = cfg or FactorConfig()
    if gcd_fn is None:
        def gcd_fn(P: Polynomial, Q: Polynomial) -> Polynomial:
            return gcd_multilinear(P, Q, cfg)

    if F.support().bit_count() < 2:
        raise PreconditionError("GCD loop needs at least two variables")
    if F.common_divisor_mask():
        raise PreconditionError("Polynomial has a variable divisor; strip trivial divisors first")

    factors = []
    current = F
    while current.support().bit_count() >= 2:
        x = _pick_pivot(current, cfg.pivot)
        G = gcd_fn(evaluate(current, x, 0), derivative(current, x))
        if G.is_constant():
            break
        # divisor and quotient live on disjoint variables
        quotient = projection(current, current.support() & ~G.support())
        if multiply(quotient, G) != current:
            raise FactorizationDefect(f"gcd returned a non-divisor: {G}")
        factors.append(quotient)
        current = G
    factors.append(current)
    return Factorization(factors=factors)


def _irreducible_factors(P: Polynomial, cfg: FactorConfig) -> list[Polynomial]:
    if P.is_constant():
        return []
    return factor_complete(P, Driver.modfd, cfg).all_factors()


def gcd_multilinear(
    P: Polynomial, Q: Polynomial, cfg: FactorConfig | None = None
) -> Polynomial:
    """Product of the irreducible factors P and Q have in common."""
    check_same_table(P, Q)
    if P.is_zero() or Q.is_zero():
        raise PreconditionError("gcd of the zero polynomial is not supported")
    cfg = cfg or FactorConfig()
    in_q = set(_irreducible_factors(Q, cfg))
    common = [f for f in _irreducible_factors(P, cfg) if f in in_q]
    return product_of(common, P.vars)
