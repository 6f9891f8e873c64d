"""Pydantic models for run configuration, reports and the component cache.

Complex numbers are written as two-element [re, im] arrays with full double
precision so reports stay diff-able and language neutral.
"""

from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    field_validator,
    model_validator,
)
from typing_extensions import Self

from .algebra import ASSERT_TOL, SUPPORTED_PRIMES
from .exceptions import BudgetExceededError

REPORT_SCHEMA_VERSION = 1
CACHE_SCHEMA_VERSION = 1

Tier = Literal["fast", "full", "slow"]

# (n, q) -> tier; rank one is fast for every supported q
BUDGET: dict[tuple[int, int], Tier] = {
    (2, 2): "fast",
    (2, 3): "fast",
    (3, 2): "fast",
    (2, 5): "full",
    (2, 7): "full",
    (3, 3): "slow",
}

SUITES: dict[str, tuple[tuple[int, int], ...]] = {
    "fast": ((2, 3), (3, 2)),
    "full": ((2, 3), (3, 2), (2, 5)),
}


def _parse_complex(value: Any) -> Any:
    if isinstance(value, list | tuple) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    return value


JsonComplex = Annotated[
    complex,
    BeforeValidator(_parse_complex),
    PlainSerializer(lambda z: [z.real, z.imag], return_type=list[float]),
]


def budget_tier(n: int, q: int) -> Tier:
    """Tier of an instance.

    Raises:
        BudgetExceededError: If (n, q) is not in the budget table
    """
    if n == 1:
        return "fast"
    tier = BUDGET.get((n, q))
    if tier is None:
        msg = f"(n={n}, q={q}) is outside the supported budget"
        raise BudgetExceededError(msg)
    return tier


def suite_instances(suite: str, allow_slow: bool = False) -> list[tuple[int, int]]:
    """(n, q) instances of a suite; full gains (3, 3) when slow runs are allowed."""
    if suite not in SUITES:
        msg = f"Unknown suite {suite!r}, expected one of {sorted(SUITES)}"
        raise ValueError(msg)
    instances = list(SUITES[suite])
    if suite == "full" and allow_slow:
        instances.append((3, 3))
    return instances


class RunConfig(BaseModel):
    """Validated settings for one CLI run on a single (n, q) instance."""

    q: int = Field(..., description="The prime q")
    n: int = Field(..., ge=1, description="Rank of the GL_n side")
    seed: int = Field(0, ge=0, description="Seed for every random commutant sample")
    tolerance: float = Field(ASSERT_TOL, gt=0, description="Theorem and consistency tolerance")
    cache_dir: Path | None = Field(None, description="Component cache root, None to disable")
    out: Path | None = Field(None, description="Report output path")
    command: Literal["verify", "table", "decompose"] = "verify"
    allow_slow: bool = False
    psi_conjugate: bool = Field(False, description="Use the conjugate additive character")
    direction: Literal[1, -1] = Field(1, description="Gelfand-Graev direction for decompose")
    with_timings: bool = False

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    @field_validator("q")
    @classmethod
    def validate_q(cls, v: int) -> int:
        """Only primes up to 7 are supported."""
        if v not in SUPPORTED_PRIMES:
            msg = f"q must be prime ≤ 7, got {v}"
            raise ValueError(msg)
        return v

    @model_validator(mode="after")
    def validate_budget(self) -> Self:
        """(n, q) must be in the budget table and slow instances must be requested."""
        tier = budget_tier(self.n, self.q)
        if tier == "slow" and not self.allow_slow:
            msg = f"(n={self.n}, q={self.q}) is a slow instance; pass --allow-slow to run it"
            raise BudgetExceededError(msg)
        if self.command == "verify" and self.n < 2:
            msg = "verify needs n ≥ 2: gamma factors pair GL_n with GL_(n-1)"
            raise ValueError(msg)
        return self

    @property
    def psi_sign(self) -> Literal[1, -1]:
        return -1 if self.psi_conjugate else 1


class ComponentRecord(BaseModel):
    """Inventory entry for one irreducible generic component."""

    label: str = Field(..., pattern=r"^\d+d-\d+$")
    index: int = Field(..., ge=0)
    dim: int = Field(..., ge=1)
    cuspidal: bool
    central_character: list[JsonComplex] = Field(
        ..., description="omega(z) for z = 1, ..., q-1"
    )
    contragredient: str | None = Field(None, description="Label of the component realizing pi^iota")

    model_config = ConfigDict(extra="forbid")


class GammaValue(BaseModel):
    """A gamma factor with the diagnostics of its extraction."""

    value: JsonComplex
    method: Literal["GK", "GK-probe", "JPSS"]
    deviation: float = Field(..., ge=0, description="Largest spread across the pairs used")
    pairs_used: int = Field(..., ge=0)

    model_config = ConfigDict(extra="forbid", frozen=True)


class GammaReport(BaseModel):
    """Result of the theorem check for one (pi, tau) pair."""

    q: int
    n: int
    psi: str
    pi_id: str
    tau_id: str
    gamma_gk: GammaValue | None = None
    gamma_jpss: GammaValue | None = None
    difference: float | None = Field(None, description="|gamma_GK - gamma_JPSS|")
    abs_gamma: float | None = None
    omega_tau_minus_one: JsonComplex
    passed: bool = False
    error: str | None = None
    diagnostics: dict[str, float] = Field(default_factory=dict)
    timings: dict[str, float] | None = None

    model_config = ConfigDict(extra="forbid")


class ReportHeader(BaseModel):
    """Header shared by every report file."""

    schema_version: int = REPORT_SCHEMA_VERSION
    command: str
    q: int
    n: int
    psi: str = Field(..., description="Additive character formula")
    seed: int
    tolerance: float
    version: str

    model_config = ConfigDict(extra="forbid")


class VerificationReport(BaseModel):
    """Output of verify: one record per (pi, tau) pair ordered by (pi id, tau id)."""

    header: ReportHeader
    records: list[GammaReport]

    model_config = ConfigDict(extra="forbid")

    @property
    def passed(self) -> bool:
        return all(record.passed for record in self.records)

    @property
    def failures(self) -> list[GammaReport]:
        return [record for record in self.records if not record.passed]


class TableReport(BaseModel):
    """Output of table: component inventories and the gamma table."""

    header: ReportHeader
    components: list[ComponentRecord]
    lower_components: list[ComponentRecord] = Field(default_factory=list)
    gamma_table: list[GammaReport] = Field(default_factory=list)

    model_config = ConfigDict(extra="forbid")


class DecompositionReport(BaseModel):
    """Output of decompose for one Gelfand-Graev space."""

    header: ReportHeader
    direction: Literal[1, -1]
    group_order: int
    space_dim: int
    components: list[ComponentRecord]

    model_config = ConfigDict(extra="forbid")


class CachedComponent(BaseModel):
    """A component basis stored as separate real and imaginary parts."""

    label: str
    index: int
    cuspidal: bool
    central_character: list[JsonComplex]
    basis_real: list[list[float]]
    basis_imag: list[list[float]]

    model_config = ConfigDict(extra="forbid")


class CacheEntry(BaseModel):
    """One decomposition on disk, keyed by (n, q, direction, seed, psi sign)."""

    schema_version: int = CACHE_SCHEMA_VERSION
    n: int
    q: int
    direction: Literal[1, -1]
    seed: int
    psi_sign: Literal[1, -1]
    components: list[CachedComponent]
    checksum: str = ""

    model_config = ConfigDict(extra="forbid")
