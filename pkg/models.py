from datetime import datetime, timezone

from pydantic import BaseModel, Field, field_validator, model_validator
from sqlmodel import Field as SQLField
from sqlmodel import SQLModel

from factorizer import Factorization
from polynomial import Polynomial, VarTable, iter_bits


class PolynomialModel(BaseModel):
    """JSON form: {"vars": [...], "monomials": [[indices...], ...]}."""

    vars: list[str]
    monomials: list[list[int]]

    @field_validator("vars")
    @classmethod
    def vars_unique(cls, vars: list[str]) -> list[str]:
        if len(set(vars)) != len(vars):
            raise ValueError("Variable names must be unique")
        if not all(vars):
            raise ValueError("Variable names must be non-empty")
        return vars

    @field_validator("monomials")
    @classmethod
    def indices_ascending(cls, monomials: list[list[int]]) -> list[list[int]]:
        for monomial in monomials:
            if any(b <= a for a, b in zip(monomial, monomial[1:])):
                raise ValueError(f"Indices must be strictly ascending, got {monomial}")
        return monomials

    @model_validator(mode="after")
    def indices_in_range(self) -> "PolynomialModel":
        for monomial in self.monomials:
            for i in monomial:
                if not 0 <= i < len(self.vars):
                    raise ValueError(f"Variable index {i} out of range for {len(self.vars)} variables")
        return self

    @classmethod
    def from_polynomial(cls, F: Polynomial, compact: bool = False) -> "PolynomialModel":
        if not compact:
            return cls(
                vars=list(F.vars.names),
                monomials=[list(iter_bits(m)) for m in F.monomials],
            )
        # renumber onto the variables that actually occur
        positions = F.variables()
        remap = {p: i for i, p in enumerate(positions)}
        return cls(
            vars=[F.vars.names[p] for p in positions],
            monomials=[[remap[i] for i in iter_bits(m)] for m in F.monomials],
        )

    def to_polynomial(self, vars: VarTable | None = None) -> Polynomial:
        table = vars or VarTable(self.vars, sort=False)
        masks = []
        for monomial in self.monomials:
            mask = 0
            for i in monomial:
                mask |= table.bit(self.vars[i])
            masks.append(mask)
        return Polynomial.from_masks(table, masks)


class FactorizationModel(BaseModel):
    trivial: list[PolynomialModel]
    factors: list[PolynomialModel]
    text: list[str] = Field(default_factory=list)

    @classmethod
    def from_factorization(cls, result: Factorization) -> "FactorizationModel":
        return cls(
            trivial=[PolynomialModel.from_polynomial(f, compact=True) for f in result.trivial],
            factors=[PolynomialModel.from_polynomial(f, compact=True) for f in result.factors],
            text=[str(f) for f in result.all_factors()],
        )


class DnfComponentsModel(BaseModel):
    mode: str
    formula: str
    components: list[str]
    # each component's Zhegalkin polynomial
    polynomials: list[PolynomialModel] = Field(default_factory=list)


class GeneratedPolynomialModel(BaseModel):
    prng: str
    seed: int
    spec: dict
    polynomial: PolynomialModel
    parts: list[PolynomialModel] = Field(default_factory=list)


class BenchRow(BaseModel):
    """Flat bench result row; its polars schema drives the CSV writer."""

    instance: str
    prng: str
    seed: int
    n: int
    m: int
    driver: str
    cutoff: int
    repeat: int
    wall_time: float
    factor_count: int
    factor_sizes: str
    classified: int
    same_mean_time: float
    cross_mean_time: float
    cross_over_same: float
    calls: int
    max_depth: int
    cutoff_hits: int
    matches_planted: bool | None = None
    error: str | None = None


class BenchRecord(SQLModel, table=True):
    id: int | None = SQLField(default=None, primary_key=True)
    recorded_at: datetime = SQLField(default_factory=lambda: datetime.now(timezone.utc))
    instance: str = SQLField(index=True)
    prng: str
    seed: int
    n: int
    m: int
    driver: str = SQLField(index=True)
    cutoff: int
    repeat: int
    wall_time: float
    factor_count: int
    factor_sizes: str
    classified: int
    same_mean_time: float
    cross_mean_time: float
    cross_over_same: float
    calls: int
    max_depth: int
    cutoff_hits: int
    matches_planted: bool | None = None
    error: str | None = None
