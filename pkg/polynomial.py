"""Sparse multilinear polynomials over GF(2).

A monomial is an int bitset over the positions of a shared VarTable
(bit i set means variable i occurs). A Polynomial keeps its monomials as a
strictly ascending tuple of masks, so structural equality is semantic
equality and derivatives/evaluations stay linear-time.
"""

import re
from collections import Counter
from functools import reduce
from operator import and_, or_
from typing import Iterable, Sequence

import numpy as np

from errors import (
    PolynomialParseError,
    PreconditionError,
    UnknownVariableError,
    VarTableMismatchError,
)

Variable = str | int

# pivot parts of polynomials this large are kept on the instance
PARTS_CACHE_MIN = 32

_TOKEN = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<num>\d+)|(?P<op>[+*])|(?P<bad>\S))"
)


def iter_bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bit_matrix(masks: Sequence[int], width: int) -> np.ndarray:
    """Rows = monomials, columns = variable positions, as a uint8 0/1 matrix."""
    nbytes = max(1, (width + 7) // 8)
    buffer = b"".join(m.to_bytes(nbytes, "little") for m in masks)
    packed = np.frombuffer(buffer, dtype=np.uint8).reshape(len(masks), nbytes)
    return np.unpackbits(packed, axis=1, bitorder="little")[:, :width]


def masks_from_bits(bits: np.ndarray) -> list[int]:
    packed = np.packbits(bits.astype(np.uint8), axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


class VarTable:
    """Ordered, immutable table of variable identifiers."""

    __slots__ = ("names", "index", "_hash")

    def __init__(self, names: Iterable[str], sort: bool = True):
        names = list(dict.fromkeys(names))
        for name in names:
            if not isinstance(name, str) or not name:
                raise ValueError(f"Variable identifiers must be non-empty strings, got {name!r}")
        self.names: tuple[str, ...] = tuple(sorted(names) if sort else names)
        self.index: dict[str, int] = {name: i for i, name in enumerate(self.names)}
        self._hash = hash(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, VarTable):
            return NotImplemented
        return self._hash == other._hash and self.names == other.names

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"VarTable({list(self.names)!r})"

    def position(self, x: Variable) -> int:
        if isinstance(x, int):
            if 0 <= x < len(self.names):
                return x
            raise UnknownVariableError(str(x))
        try:
            return self.index[x]
        except KeyError:
            raise UnknownVariableError(x) from None

    def bit(self, x: Variable) -> int:
        return 1 << self.position(x)

    def mask_of(self, variables: Iterable[Variable] | int) -> int:
        if isinstance(variables, int):
            return variables
        mask = 0
        for x in variables:
            mask |= self.bit(x)
        return mask

    def names_of(self, mask: int) -> list[str]:
        return [self.names[i] for i in iter_bits(mask)]


class Polynomial:
    """Canonical multilinear polynomial: strictly ascending, duplicate-free masks.

    The constructor trusts its input; use `from_masks` (mod-2 normalization)
    for untrusted masks. Derived facts (support, divisors, length, pivot
    splits) are computed at most once per instance.
    """

    __slots__ = (
        "vars",
        "monomials",
        "_support",
        "_divisors",
        "_length",
        "_primitive",
        "_splits",
        "_parts",
    )

    def __init__(self, vars: VarTable, monomials: tuple[int, ...] = ()):
        self.vars = vars
        self.monomials = monomials
        self._support: int | None = None
        self._divisors: int | None = None
        self._length: int | None = None
        self._primitive: Polynomial | None = None
        self._splits: tuple[np.ndarray, np.ndarray] | None = None
        self._parts: dict[int, tuple[Polynomial, Polynomial]] | None = None

    @classmethod
    def from_masks(cls, vars: VarTable, masks: Iterable[int]) -> "Polynomial":
        counts = Counter(masks)
        return cls(vars, tuple(sorted(m for m, c in counts.items() if c & 1)))

    @classmethod
    def zero(cls, vars: VarTable) -> "Polynomial":
        return cls(vars, ())

    @classmethod
    def one(cls, vars: VarTable) -> "Polynomial":
        return cls(vars, (0,))

    def is_zero(self) -> bool:
        return not self.monomials

    def is_one(self) -> bool:
        return self.monomials == (0,)

    def is_constant(self) -> bool:
        return not self.monomials or self.monomials == (0,)

    @property
    def monomial_count(self) -> int:
        return len(self.monomials)

    def support(self) -> int:
        """Var(F) as a mask."""
        if self._support is None:
            self._support = reduce(or_, self.monomials, 0)
        return self._support

    def variables(self) -> list[int]:
        return list(iter_bits(self.support()))

    def var_names(self) -> list[str]:
        return self.vars.names_of(self.support())

    def common_divisor_mask(self) -> int:
        """Variables present in every monomial (0 for the zero polynomial)."""
        if self._divisors is None:
            self._divisors = reduce(and_, self.monomials) if self.monomials else 0
        return self._divisors

    def quotient_by_monomial(self, mask: int) -> "Polynomial":
        # every monomial contains `mask`, so clearing it keeps the order
        return Polynomial(self.vars, tuple(m ^ mask for m in self.monomials))

    def primitive(self) -> "Polynomial":
        """F divided by every variable that divides it."""
        if self._primitive is None:
            divisors = self.common_divisor_mask()
            self._primitive = self.quotient_by_monomial(divisors) if divisors else self
        return self._primitive

    def split_lengths(self) -> tuple[np.ndarray, np.ndarray]:
        """Per position z: (length(dF/dz), length(F_{z=0})), as int64 arrays."""
        if self._splits is None:
            width = len(self.vars)
            if not self.monomials:
                self._splits = (np.zeros(width, np.int64), np.zeros(width, np.int64))
                return self._splits
            total = length(self)
            bits = bit_matrix(self.monomials, width)
            weights = np.fromiter(
                (m.bit_count() for m in self.monomials), dtype=np.int64, count=len(self.monomials)
            )
            # integer sums stay exact in float32 below 2**24
            dtype = np.float32 if total < 1 << 24 else np.float64
            inside = np.rint(weights.astype(dtype) @ bits.astype(dtype)).astype(np.int64)
            counts = bits.sum(axis=0, dtype=np.int64)
            # a monomial equal to z derives to the constant 1, which has length 1
            singles = bits[weights == 1].sum(axis=0, dtype=np.int64)
            self._splits = (inside - counts + singles, total - inside)
        return self._splits

    def pivot_parts(self, z: int) -> "tuple[Polynomial, Polynomial]":
        """(dF/dz, F_{z=0}) for position z; remembered for larger polynomials."""
        if self._parts is not None and z in self._parts:
            return self._parts[z]
        b = 1 << z
        parts = (
            Polynomial(self.vars, tuple(m ^ b for m in self.monomials if m & b)),
            Polynomial(self.vars, tuple(m for m in self.monomials if not m & b)),
        )
        if len(self.monomials) >= PARTS_CACHE_MIN:
            if self._parts is None:
                self._parts = {}
            self._parts[z] = parts
        return parts

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.monomials == other.monomials and self.vars == other.vars
        if isinstance(other, ProductPolynomial):
            return other == self
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.vars, self.monomials))

    def __add__(self, other: "Polynomial") -> "Polynomial":
        return add(self, other)

    def __mul__(self, other: "Polynomial") -> "ProductPolynomial":
        return multiply(self, other)

    def __str__(self) -> str:
        return format_polynomial(self)

    def __repr__(self) -> str:
        text = format_polynomial(self)
        if len(text) > 80:
            text = text[:77] + "..."
        return f"Polynomial({text!r})"


class ProductPolynomial:
    """Result of `multiply`: terms may hold squared variables.

    Each term is encoded as `(squares << width) | linear`, so a term without
    squares is numerically equal to the multilinear mask it stands for.
    """

    __slots__ = ("vars", "terms")

    def __init__(self, vars: VarTable, terms: tuple[int, ...]):
        self.vars = vars
        self.terms = terms

    @property
    def width(self) -> int:
        return len(self.vars)

    def is_zero(self) -> bool:
        return not self.terms

    def is_multilinear(self) -> bool:
        return not self.terms or self.terms[-1] < (1 << self.width)

    def as_polynomial(self) -> Polynomial:
        if not self.is_multilinear():
            raise PreconditionError("Product has squared variables and is not multilinear")
        return Polynomial(self.vars, self.terms)

    def derivative(self, x: Variable) -> "ProductPolynomial":
        # standard formal derivative: d(x^2)/dx = 2x = 0 over GF(2)
        b = self.vars.bit(x)
        return ProductPolynomial(self.vars, tuple(t ^ b for t in self.terms if t & b))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ProductPolynomial):
            return self.terms == other.terms and self.vars == other.vars
        if isinstance(other, Polynomial):
            return self.terms == other.monomials and self.vars == other.vars
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.vars, self.terms))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        full = (1 << self.width) - 1
        parts = []
        for term in self.terms:
            squares, linear = term >> self.width, term & full
            factors = [
                f"{self.vars.names[i]}^2" if squares >> i & 1 else self.vars.names[i]
                for i in iter_bits(squares | linear)
            ]
            parts.append("*".join(factors) or "1")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"ProductPolynomial({str(self)!r})"


def check_same_table(*polys: Polynomial | ProductPolynomial) -> None:
    first = polys[0].vars
    for poly in polys[1:]:
        if poly.vars is not first and poly.vars != first:
            raise VarTableMismatchError("Polynomials are defined over different variable tables")


def parse(text: str, vars: VarTable | None = None) -> Polynomial:
    tokens = []
    for match in _TOKEN.finditer(text):
        kind = match.lastgroup
        if kind is None:
            break
        tokens.append((kind, match.group(kind), match.start(kind)))
    if not tokens:
        raise PolynomialParseError("Empty polynomial", len(text))

    if len(tokens) == 1 and tokens[0][:2] == ("num", "0"):
        if vars is None:
            vars = VarTable([])
        return Polynomial.zero(vars)

    terms: list[list[str]] = [[]]
    expect_operand = True
    for kind, value, pos in tokens:
        if kind == "bad":
            raise PolynomialParseError(f"Unexpected character {value!r}", pos)
        if expect_operand:
            if kind == "name":
                terms[-1].append(value)
            elif kind == "num" and value == "1":
                pass
            else:
                raise PolynomialParseError(f"Expected variable or 1, got {value!r}", pos)
            expect_operand = False
        else:
            if kind != "op":
                raise PolynomialParseError(f"Expected '+' or '*', got {value!r}", pos)
            if value == "+":
                terms.append([])
            expect_operand = True
    if expect_operand:
        raise PolynomialParseError("Unexpected end of input", len(text))

    if vars is None:
        vars = VarTable(name for term in terms for name in term)
    masks = [vars.mask_of(term) for term in terms]
    return Polynomial.from_masks(vars, masks)


def format_polynomial(F: Polynomial) -> str:
    if not F.monomials:
        return "0"
    names = F.vars.names
    return " + ".join(
        "*".join(names[i] for i in iter_bits(m)) if m else "1" for m in F.monomials
    )


def add(F: Polynomial, G: Polynomial) -> Polynomial:
    check_same_table(F, G)
    return Polynomial(F.vars, tuple(sorted(set(F.monomials).symmetric_difference(G.monomials))))


def multiply(F: Polynomial, G: Polynomial) -> ProductPolynomial:
    check_same_table(F, G)
    if F.support() & G.support() == 0:
        # disjoint supports: every pair gives a distinct multilinear monomial
        return ProductPolynomial(F.vars, tuple(sorted(a | b for a in F.monomials for b in G.monomials)))
    width = len(F.vars)
    counts = Counter(((a & b) << width) | (a ^ b) for a in F.monomials for b in G.monomials)
    return ProductPolynomial(F.vars, tuple(sorted(t for t, c in counts.items() if c & 1)))


def products_equal(A: Polynomial, D: Polynomial, B: Polynomial, C: Polynomial) -> bool:
    """multiply(A, D) == multiply(B, C), without building either product."""
    check_same_table(A, D, B, C)
    if not (A.support() & D.support() or B.support() & C.support()):
        # both products are plain sets of unions
        if len(A.monomials) * len(D.monomials) != len(B.monomials) * len(C.monomials):
            return False
        return {a | d for a in A.monomials for d in D.monomials} == {
            b | c for b in B.monomials for c in C.monomials
        }
    width = len(A.vars)
    counts = Counter(((a & d) << width) | (a ^ d) for a in A.monomials for d in D.monomials)
    counts.update(((b & c) << width) | (b ^ c) for b in B.monomials for c in C.monomials)
    return all(not count & 1 for count in counts.values())


def product_of(factors: Iterable[Polynomial], vars: VarTable | None = None) -> Polynomial:
    """Product of pairwise variable-disjoint multilinear polynomials."""
    result = None
    for factor in factors:
        result = factor if result is None else multiply(result, factor).as_polynomial()
    if result is None:
        if vars is None:
            raise PreconditionError("Empty product needs a variable table")
        return Polynomial.one(vars)
    return result


def derivative(F: Polynomial, x: Variable) -> Polynomial:
    b = F.vars.bit(x)
    return Polynomial(F.vars, tuple(m ^ b for m in F.monomials if m & b))


def evaluate(F: Polynomial, x: Variable, a: int) -> Polynomial:
    b = F.vars.bit(x)
    if a not in (0, 1):
        raise ValueError(f"Evaluation point must be 0 or 1, got {a!r}")
    if a == 0:
        return Polynomial(F.vars, tuple(m for m in F.monomials if not m & b))
    without = {m for m in F.monomials if not m & b}
    cleared = {m ^ b for m in F.monomials if m & b}
    return Polynomial(F.vars, tuple(sorted(without ^ cleared)))


def divides_var(z: Variable, F: Polynomial) -> bool:
    b = F.vars.bit(z)
    if not F.monomials:
        raise PreconditionError("Divisibility is undefined for the zero polynomial")
    return all(m & b for m in F.monomials)


def projection(F: Polynomial, sigma: Iterable[Variable] | int) -> Polynomial:
    mask = F.vars.mask_of(sigma)
    return Polynomial(F.vars, tuple(sorted({m & mask for m in F.monomials})))


def length(F: Polynomial) -> int:
    if F._length is None:
        F._length = sum(m.bit_count() or 1 for m in F.monomials)
    return F._length


def strip_trivial_divisors(F: Polynomial) -> tuple[list[Polynomial], Polynomial]:
    """Split off factors x and x+1; returns (trivial factors, core)."""
    factors: list[Polynomial] = []
    core = F
    changed = True
    while changed and not core.is_constant():
        changed = False
        divisors = core.common_divisor_mask()
        if divisors:
            factors.extend(Polynomial(F.vars, (1 << i,)) for i in iter_bits(divisors))
            core = core.quotient_by_monomial(divisors)
            changed = True
        for i in core.variables():
            if evaluate(core, i, 1).is_zero():
                # F = (x+1) * G with G free of x, and G = F_{x=0}
                factors.append(Polynomial(F.vars, (0, 1 << i)))
                core = evaluate(core, i, 0)
                changed = True
    return factors, core
