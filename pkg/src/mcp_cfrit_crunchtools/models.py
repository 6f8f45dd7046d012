"""Pydantic models for every file and tool boundary.

Scenario files, design inputs and results, gain reports, sweep grids and
records, and the run manifest are validated here before any computation.
"""

import math
from datetime import datetime
from enum import Enum
from typing import Annotated, Any, Literal

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    computed_field,
    field_validator,
    model_validator,
)


class TransferFunctionSpec(BaseModel):
    """Rational transfer function, coefficients in descending powers of z."""

    model_config = ConfigDict(extra="forbid")

    num: list[float] = Field(..., min_length=1, description="Numerator coefficients")
    den: list[float] = Field(..., min_length=1, description="Denominator coefficients")

    @model_validator(mode="after")
    def check_properness(self) -> "TransferFunctionSpec":
        if self.den[0] == 0:
            raise ValueError("leading denominator coefficient must be nonzero")
        if len(self.num) > len(self.den):
            raise ValueError("numerator degree exceeds denominator degree")
        return self


class PulseWindow(BaseModel):
    """v(t) = amplitude for on_from <= t <= on_to, 0 otherwise."""

    model_config = ConfigDict(extra="forbid")

    type: Literal["pulse-window"] = "pulse-window"
    on_from: int = Field(..., ge=0)
    on_to: int = Field(..., ge=0)
    amplitude: float = 1.0

    @model_validator(mode="after")
    def check_window(self) -> "PulseWindow":
        if self.on_to < self.on_from:
            raise ValueError("on_to must not precede on_from")
        return self


class ExpectedValues(BaseModel):
    """Published reference values a scenario is checked against by `verify`."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    f_star: list[float] | None = Field(default=None, alias="F_star")
    f_e_star: list[float] | None = Field(default=None, alias="F_E_star")
    e_max: float | None = Field(default=None, alias="E_max")
    w_max: float | None = Field(default=None, alias="W_max")
    lambda_min: float | None = None
    kappa_bar: int | None = None
    tolerance: float = Field(default=1e-3, gt=0)


class ScenarioConfig(BaseModel):
    """Plant, controller, reference model, excitation and sample count."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    name: str = Field(default="scenario", max_length=200)
    a: list[list[float]] = Field(..., alias="A", min_length=1)
    b: list[float] | list[list[float]] = Field(..., alias="B")
    f_ini: list[float] = Field(..., alias="F_ini")
    h_star: list[TransferFunctionSpec] | None = Field(default=None, alias="H_star")
    target_gain: list[float] | None = None
    excitation: PulseWindow | list[float]
    n_samples: int = Field(..., alias="N", ge=1)
    steps: int | None = Field(default=None, ge=1)
    sampling_period: float = Field(default=1.0, gt=0)
    epsilon: float = Field(default=1e-5, gt=0)
    expected: ExpectedValues | None = None

    @field_validator("b", mode="before")
    @classmethod
    def flatten_column(cls, v: Any) -> Any:
        if isinstance(v, list) and v and all(isinstance(row, list) for row in v):
            if any(len(row) != 1 for row in v):
                raise ValueError("B must be an n x 1 column")
            return [row[0] for row in v]
        return v

    @model_validator(mode="after")
    def check_dimensions(self) -> "ScenarioConfig":
        n = len(self.a)
        if any(len(row) != n for row in self.a):
            raise ValueError("A must be square")
        if len(self.b) != n:
            raise ValueError(f"B must have {n} entries")
        if len(self.f_ini) != n:
            raise ValueError(f"F_ini must have {n} entries")
        if (self.h_star is None) == (self.target_gain is None):
            raise ValueError("give exactly one of H_star or target_gain")
        if self.h_star is not None and len(self.h_star) != n:
            raise ValueError(f"H_star must list {n} transfer functions")
        if self.target_gain is not None and len(self.target_gain) != n:
            raise ValueError(f"target_gain must have {n} entries")
        if self.steps is not None and self.steps < self.n_samples:
            raise ValueError("steps must be at least N")
        return self

    @property
    def n(self) -> int:
        return len(self.a)

    @property
    def total_steps(self) -> int:
        return self.steps if self.steps is not None else self.n_samples


class DesignSpec(BaseModel):
    """Inputs to the (gamma, kappa) design: tolerance, dimensions and data norms."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    epsilon: float = Field(..., gt=0)
    n: int = Field(..., ge=1)
    n_samples: int = Field(..., alias="N", ge=1)
    m_terms: int = Field(..., alias="M", ge=1)
    e_max: float = Field(..., alias="E_max", gt=0)
    w_max: float = Field(..., alias="W_max", gt=0)
    lambda_min: float = Field(..., gt=0)

    @model_validator(mode="after")
    def check_term_count(self) -> "DesignSpec":
        expected = math.factorial(self.n - 1) * self.n**2 * self.n_samples
        if self.m_terms != expected:
            raise ValueError(f"M must equal (n-1)! n^2 N = {expected}")
        return self


class DesignResult(BaseModel):
    """Selected (gamma, kappa) with their set memberships."""

    model_config = ConfigDict(populate_by_name=True)

    gamma_bar: float
    kappa_bar: int
    gamma_threshold: float
    q_bound: int
    term_max: int | None = Field(
        default=None, description="Exact largest quantized term product, when the data is known"
    )
    in_gamma: bool = Field(..., alias="in_Gamma")
    in_q: bool = Field(..., alias="in_Q")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def q_bound_bits(self) -> int:
        return self.q_bound.bit_length()


class OverflowReport(BaseModel):
    """Per-run overflow diagnostics."""

    model_config = ConfigDict(extra="ignore")

    term_count: int = Field(..., ge=0)
    overflowed_terms: list[tuple[int, int]] = Field(default_factory=list)
    theoretical_flag: bool

    @computed_field  # type: ignore[prop-decorator]
    @property
    def observed_flag(self) -> bool:
        return bool(self.overflowed_terms)


class OverflowSummary(BaseModel):
    model_config = ConfigDict(extra="forbid")

    theoretical: bool
    observed: bool
    count: int


class GainReport(BaseModel):
    """Plaintext and encrypted gains for one (gamma, kappa) run."""

    model_config = ConfigDict(populate_by_name=True)

    f_star: list[float] = Field(..., alias="F_star")
    f_e_star: list[float] | None = Field(default=None, alias="F_E_star")
    l2_deviation: float | None = None
    epsilon: float | None = None
    gamma: float | None = None
    kappa: int | None = None
    m_terms: int = Field(..., alias="M")
    overflow: OverflowSummary | None = None
    guarantee_held: bool | None = None
    objective: float | None = Field(default=None, description="J(F*) on the tuning data")
    objective_initial: float | None = Field(default=None, description="J(F_ini)")
    wall_time: float = Field(..., ge=0)


class PointClass(str, Enum):
    """Four-way classification of a (kappa, gamma) grid point."""

    FEASIBLE = "feasible-blue"
    UNPROVEN = "accurate-but-unproven-yellow"
    ABOVE_EPSILON = "no-overflow-above-eps-magenta"
    OVERFLOW = "overflow-red"


class SweepRecord(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    kappa: int
    gamma: float
    error: float
    theory_ok: bool
    observed_overflow: bool
    point_class: PointClass = Field(..., alias="class")
    wall_ms: float = Field(default=0.0, ge=0)


class SweepGrid(BaseModel):
    """A (kappa, gamma) grid over one scenario."""

    model_config = ConfigDict(extra="forbid")

    kappa_values: list[Annotated[int, Field(ge=3)]] = Field(..., min_length=1)
    gamma_values: list[Annotated[float, Field(ge=1)]] = Field(..., min_length=1)
    epsilon: float = Field(..., gt=0)
    scenario: ScenarioConfig
    seed: int = 0
    plaintext_quantized: bool = Field(
        default=False,
        description="Use the big-integer quantized pipeline instead of encrypting",
    )


class RunManifest(BaseModel):
    """Everything needed to reproduce an output file."""

    model_config = ConfigDict(extra="forbid")

    command: str
    scenario: str | None = None
    seed: int | None = None
    outputs: list[str] = Field(default_factory=list)
    overrides: dict[str, float | int | bool | str | None] = Field(default_factory=dict)
    timestamp: datetime


class VerifyCheck(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    passed: bool
    detail: str = ""
    required: bool = True


class VerifyReport(BaseModel):
    """Outcome of the self-check suite."""

    model_config = ConfigDict(extra="ignore")

    manifest: RunManifest
    checks: list[VerifyCheck] = Field(default_factory=list)

    @computed_field  # type: ignore[prop-decorator]
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)
