"""AND-decomposition of DNF formulas and Cartesian decomposition of tables."""

import itertools
import logging
import re
from enum import StrEnum
from pathlib import Path

import polars as pl
from pydantic import BaseModel, ConfigDict, Field, model_validator

from errors import DnfError, FactorizationDefect, TableError
from factorizer import FactorConfig, factor_complete
from polynomial import Polynomial, VarTable, iter_bits

logger = logging.getLogger(__name__)

NEGATED_SUFFIX = "_neg"
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class DnfMode(StrEnum):
    monotone = "monotone"
    full_dnf = "full_dnf"


class DnfLiteral(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    positive: bool = True

    def __str__(self) -> str:
        return self.name if self.positive else f"!{self.name}"

    @property
    def variable(self) -> str:
        return self.name if self.positive else f"{self.name}{NEGATED_SUFFIX}"


class DnfFormula(BaseModel):
    model_config = ConfigDict(frozen=True)

    terms: frozenset[frozenset[DnfLiteral]]
    mode: DnfMode = DnfMode.monotone

    @model_validator(mode="after")
    def check_mode(self) -> "DnfFormula":
        if self.mode is DnfMode.monotone:
            for term in self.terms:
                negative = [str(lit) for lit in term if not lit.positive]
                if negative:
                    raise ValueError(f"Negative literals {negative} in a monotone formula")
        else:
            names = self.names()
            for term in self.terms:
                mentioned = [lit.name for lit in term]
                if len(mentioned) != len(set(mentioned)) or set(mentioned) != names:
                    raise ValueError(
                        f"Term {format_term(term)!r} must mention every variable exactly once"
                    )
        return self

    def names(self) -> set[str]:
        return {lit.name for term in self.terms for lit in term}

    def evaluate(self, assignment: dict[str, bool]) -> bool:
        return any(
            all(assignment[lit.name] == lit.positive for lit in term) for term in self.terms
        )

    def __str__(self) -> str:
        return format_dnf(self)


def format_term(term: frozenset[DnfLiteral]) -> str:
    return "&".join(sorted(str(lit) for lit in term))


def format_dnf(f: DnfFormula) -> str:
    return " | ".join(sorted(format_term(term) for term in f.terms))


def parse_dnf(text: str, mode: DnfMode | str = DnfMode.monotone) -> DnfFormula:
    """Terms joined by "|", literals by "&", negation prefix "!"."""
    terms = []
    for term_text in text.split("|"):
        literals = []
        for raw in term_text.split("&"):
            raw = raw.strip()
            positive = not raw.startswith("!")
            name = raw.lstrip("!").strip()
            if not _NAME.fullmatch(name):
                raise DnfError(f"Invalid literal {raw!r} in term {term_text.strip()!r}")
            literals.append(DnfLiteral(name=name, positive=positive))
        terms.append(frozenset(literals))
    try:
        return DnfFormula(terms=frozenset(terms), mode=DnfMode(mode))
    except ValueError as e:
        raise DnfError(str(e)) from e


def minimize_monotone(f: DnfFormula) -> DnfFormula:
    """Absorption: drop every term that contains another term."""
    if f.mode is not DnfMode.monotone:
        raise DnfError("Absorption minimization applies to monotone formulas only")
    kept: list[frozenset[DnfLiteral]] = []
    for term in sorted(f.terms, key=len):
        if not any(other <= term for other in kept):
            kept.append(term)
    return DnfFormula(terms=frozenset(kept), mode=f.mode)


def _literal_table(f: DnfFormula) -> tuple[VarTable, dict[str, DnfLiteral]]:
    by_variable: dict[str, DnfLiteral] = {}
    for term in f.terms:
        for lit in term:
            previous = by_variable.setdefault(lit.variable, lit)
            if previous != lit:
                raise DnfError(f"Variable name collision on {lit.variable!r}")
    return VarTable(by_variable), by_variable


def dnf_to_polynomial(f: DnfFormula, minimize: bool = False) -> Polynomial:
    if f.mode is DnfMode.monotone:
        if minimize:
            f = minimize_monotone(f)
        elif minimize_monotone(f).terms != f.terms:
            raise DnfError("Formula has absorbed terms; minimize it first")
    vars, _ = _literal_table(f)
    return Polynomial.from_masks(
        vars, (vars.mask_of(lit.variable for lit in term) for term in f.terms)
    )


def decompose_dnf(
    f: DnfFormula, minimize: bool = False, cfg: FactorConfig | None = None
) -> list[DnfFormula]:
    if f.mode is DnfMode.monotone and minimize:
        f = minimize_monotone(f)
    F = dnf_to_polynomial(f)
    if F.is_constant():
        return [f]
    _, literals = _literal_table(f)
    components = []
    for factor in factor_complete(F, cfg=cfg).all_factors():
        terms = frozenset(
            frozenset(literals[factor.vars.names[i]] for i in iter_bits(m))
            for m in factor.monomials
        )
        components.append(DnfFormula(terms=terms, mode=f.mode))
    logger.debug("DNF with %d terms -> %d components", len(f.terms), len(components))
    return components


def truth_table_equivalent(f: DnfFormula, components: list[DnfFormula]) -> bool:
    names = sorted(f.names().union(*(c.names() for c in components)))
    for values in itertools.product((False, True), repeat=len(names)):
        assignment = dict(zip(names, values))
        if f.evaluate(assignment) != all(c.evaluate(assignment) for c in components):
            return False
    return True


class DataTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    attributes: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    @model_validator(mode="after")
    def check_shape(self) -> "DataTable":
        if len(set(self.attributes)) != len(self.attributes) or not all(self.attributes):
            raise ValueError("Attribute names must be unique and non-empty")
        arity = len(self.attributes)
        for i, row in enumerate(self.rows):
            if len(row) != arity:
                raise ValueError(f"Row {i} has {len(row)} cells, expected {arity}")
        if len(set(self.rows)) != len(self.rows):
            raise ValueError("Duplicate rows would cancel mod 2; deduplicate them (--dedupe)")
        return self

    @classmethod
    def from_rows(
        cls, attributes: list[str], rows: list[tuple[str, ...]], dedupe: bool = False
    ) -> "DataTable":
        errors = []
        first_seen: dict[tuple[str, ...], int] = {}
        unique = []
        for i, row in enumerate(rows):
            row = tuple(row)
            if row in first_seen:
                errors.append({"row": i, "duplicate_of": first_seen[row]})
                continue
            first_seen[row] = i
            unique.append(row)
        if errors and not dedupe:
            raise TableError(
                f"{len(errors)} duplicate rows would cancel mod 2; rerun with --dedupe: {errors}"
            )
        return cls(attributes=tuple(attributes), rows=tuple(unique))

    def row_set(self) -> set[tuple[str, ...]]:
        return set(self.rows)


class TableDecomposition(BaseModel):
    tables: list[DataTable]
    constant_columns: list[tuple[str, str]] = Field(default_factory=list)

    def attributes(self) -> set[str]:
        names = {attr for attr, _ in self.constant_columns}
        for table in self.tables:
            names.update(table.attributes)
        return names

    def cross_product(self, attributes: tuple[str, ...]) -> set[tuple[str, ...]]:
        constants = dict(self.constant_columns)
        rows = set()
        for combo in itertools.product(*(t.rows for t in self.tables)):
            cells = dict(constants)
            for table, row in zip(self.tables, combo):
                cells.update(zip(table.attributes, row))
            rows.add(tuple(cells[attr] for attr in attributes))
        return rows


def _escape_tag_part(text: str) -> str:
    return text.replace("%", "%25").replace("_", "%5F")


def value_tag(attribute: str, value: str) -> str:
    """`value_attribute`, percent-escaping `%` and `_` inside either part so tags never collide."""
    return f"{_escape_tag_part(value)}_{_escape_tag_part(attribute)}"


def table_tags(t: DataTable) -> dict[str, tuple[str, str]]:
    """Variable name -> (attribute, value); every value is tagged with its attribute."""
    tags: dict[str, tuple[str, str]] = {}
    for row in t.rows:
        for attribute, value in zip(t.attributes, row):
            tags[value_tag(attribute, value)] = (attribute, value)
    return tags


def table_to_polynomial(t: DataTable) -> Polynomial:
    if len(set(t.rows)) != len(t.rows):
        raise TableError("Duplicate rows would cancel mod 2; rerun with --dedupe")
    vars = VarTable(table_tags(t))
    return Polynomial.from_masks(
        vars,
        (vars.mask_of(value_tag(a, v) for a, v in zip(t.attributes, row)) for row in t.rows),
    )


def polynomial_to_table(
    F: Polynomial, attributes: tuple[str, ...], tags: dict[str, tuple[str, str]]
) -> DataTable:
    """Decode monomials back to rows; each monomial holds one value per attribute."""
    names = F.vars.names
    rows = []
    for m in F.monomials:
        cells: dict[str, str] = {}
        for i in iter_bits(m):
            attribute, value = tags[names[i]]
            if attribute in cells:
                raise FactorizationDefect(f"Monomial has two values for attribute {attribute!r}")
            cells[attribute] = value
        if set(cells) != set(attributes):
            raise FactorizationDefect(
                f"Monomial covers {sorted(cells)}, expected {sorted(attributes)}"
            )
        rows.append(tuple(cells[a] for a in attributes))
    return DataTable(attributes=attributes, rows=tuple(rows))


def _merge_constants(
    decomposition: TableDecomposition, target: str | int, order: dict[str, int]
) -> TableDecomposition:
    constants = decomposition.constant_columns
    if not constants:
        return decomposition
    tables = list(decomposition.tables)
    if not tables:
        attributes = tuple(attr for attr, _ in constants)
        row = tuple(value for _, value in constants)
        return TableDecomposition(tables=[DataTable(attributes=attributes, rows=(row,))])
    if target == "auto":
        index = min(range(len(tables)), key=lambda i: (len(tables[i].rows), i))
    else:
        index = int(target)
        if not 0 <= index < len(tables):
            raise TableError(f"No factor table {index}; there are {len(tables)}")
    table = tables[index]
    attributes = tuple(
        sorted(table.attributes + tuple(a for a, _ in constants), key=order.__getitem__)
    )
    cells = dict(constants)
    rows = tuple(
        tuple({**cells, **dict(zip(table.attributes, row))}[a] for a in attributes)
        for row in table.rows
    )
    tables[index] = DataTable(attributes=attributes, rows=rows)
    return TableDecomposition(tables=tables)


def decompose_table(
    t: DataTable,
    merge_constants: str | int | None = None,
    cfg: FactorConfig | None = None,
) -> TableDecomposition:
    order = {attr: i for i, attr in enumerate(t.attributes)}
    if not t.rows:
        return TableDecomposition(tables=[t])

    tags = table_tags(t)
    F = table_to_polynomial(t)
    result = factor_complete(F, cfg=cfg)

    constants = []
    for trivial in result.trivial:
        if trivial.monomial_count != 1 or trivial.monomials[0].bit_count() != 1:
            raise FactorizationDefect(f"Unexpected trivial factor {trivial} in a table")
        constants.append(tags[trivial.var_names()[0]])
    constants.sort(key=lambda c: order[c[0]])

    tables = []
    for factor in result.factors:
        attributes = tuple(
            sorted({tags[name][0] for name in factor.var_names()}, key=order.__getitem__)
        )
        tables.append(polynomial_to_table(factor, attributes, tags))

    decomposition = TableDecomposition(tables=tables, constant_columns=constants)
    if merge_constants is not None:
        decomposition = _merge_constants(decomposition, merge_constants, order)

    if decomposition.attributes() != set(t.attributes):
        raise FactorizationDefect("Decomposition does not partition the attributes")
    if decomposition.cross_product(t.attributes) != t.row_set():
        raise FactorizationDefect("Cross product of the decomposition differs from the input")
    logger.debug(
        "table %dx%d -> %d tables, %d constant columns",
        len(t.rows),
        len(t.attributes),
        len(decomposition.tables),
        len(decomposition.constant_columns),
    )
    return decomposition


def read_table_csv(path: str | Path, dedupe: bool = False) -> DataTable:
    frame = pl.read_csv(path, infer_schema=False, missing_utf8_is_empty_string=True)
    frame = frame.with_columns(pl.all().str.strip_chars())
    attributes = [name.strip() for name in frame.columns]
    return DataTable.from_rows(attributes, frame.rows(), dedupe=dedupe)


def write_table_csv(t: DataTable, path: str | Path | None = None) -> str | None:
    """Write `t` to `path`, or return the CSV text when no path is given."""
    frame = pl.DataFrame(
        [list(row) for row in t.rows],
        schema={attr: pl.String for attr in t.attributes},
        orient="row",
    )
    return frame.write_csv(path)
