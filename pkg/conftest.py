import numpy as np
import pytest

from identity import Quad
from polynomial import (
    Polynomial,
    VarTable,
    masks_from_bits,
    multiply,
    product_of,
    projection,
    strip_trivial_divisors,
)


def random_polynomial(
    rng: np.random.Generator,
    vars: VarTable,
    positions: list[int],
    m: int,
    p: float = 0.5,
) -> Polynomial:
    """Random masks over `positions`; duplicates cancel mod 2."""
    bits = np.zeros((m, len(vars)), dtype=bool)
    bits[:, positions] = rng.random((m, len(positions))) < p
    return Polynomial.from_masks(vars, masks_from_bits(bits))


def _finest_split(F: Polynomial) -> list[int]:
    positions = F.variables()
    if len(positions) < 2:
        return [F.support()]
    first, rest = positions[0], positions[1:]
    # every bipartition with `first` on the left: 2^(n-1) - 1 of them
    for choice in range(1, 1 << len(rest)):
        right = 0
        for k, y in enumerate(rest):
            if choice >> k & 1:
                right |= 1 << y
        left = F.support() & ~right
        P, Q = projection(F, left), projection(F, right)
        if multiply(P, Q) == F:
            return _finest_split(P) + _finest_split(Q)
    return [F.support()]


def brute_force_supports(F: Polynomial) -> list[int]:
    """Variable supports of the irreducible factors, found by exhaustive bipartition."""
    trivial, core = strip_trivial_divisors(F)
    supports = [t.support() for t in trivial]
    if not core.is_constant():
        supports += _finest_split(core)
    return sorted(supports)


def multiply_oracle(q: Quad) -> bool:
    return multiply(q.a, q.d) == multiply(q.b, q.c)


def equal_quad(rng: np.random.Generator, vars: VarTable, n: int) -> Quad:
    """A=PQ, D=RS, B=PR, C=QS with P,S over one half and Q,R over the other."""
    positions = list(rng.permutation(n))
    left, right = positions[: n // 2], positions[n // 2 :]
    P = random_polynomial(rng, vars, left, int(rng.integers(1, 6)))
    S = random_polynomial(rng, vars, left, int(rng.integers(1, 6)))
    Q = random_polynomial(rng, vars, right, int(rng.integers(1, 6)))
    R = random_polynomial(rng, vars, right, int(rng.integers(1, 6)))
    return Quad(
        a=product_of([P, Q], vars),
        d=product_of([R, S], vars),
        b=product_of([P, R], vars),
        c=product_of([Q, S], vars),
    )


def random_quad(rng: np.random.Generator, vars: VarTable, n: int) -> Quad:
    positions = list(range(n))
    return Quad(
        *(random_polynomial(rng, vars, positions, int(rng.integers(0, 17))) for _ in range(4))
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def table12() -> VarTable:
    return VarTable((f"v{i:02d}" for i in range(12)), sort=False)


@pytest.fixture
def oracles():
    """Helpers shared by the property suites."""

    class Oracles:
        random_polynomial = staticmethod(random_polynomial)
        brute_force_supports = staticmethod(brute_force_supports)
        multiply_oracle = staticmethod(multiply_oracle)
        equal_quad = staticmethod(equal_quad)
        random_quad = staticmethod(random_quad)

    return Oracles
