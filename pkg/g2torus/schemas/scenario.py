from fractions import Fraction
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from g2torus.core.config import settings


def parse_rational(value: Union[str, int, float]) -> Fraction:
    """'1/3', '2', 0.5 -> Fraction. Floats are taken at their decimal representation."""
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value).strip())


class FourierMode(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: List[int] = Field(..., description="Integer wave vector on the base torus")
    amplitude: float
    phase: float = 0.0

    @field_validator("k")
    @classmethod
    def four_components(cls, v: List[int]) -> List[int]:
        if len(v) != 4:
            raise ValueError("wave vector needs 4 integer components")
        return v


class InstantonConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    periods: List[List[int]] = Field(..., description="Integer periods of each abelian curvature")
    weights: Optional[List[float]] = None

    @model_validator(mode="after")
    def consistent(self) -> "InstantonConfig":
        if any(len(row) != 6 for row in self.periods):
            raise ValueError("each curvature needs 6 integer periods")
        if self.weights is not None and len(self.weights) != len(self.periods):
            raise ValueError("one weight per curvature is required")
        return self


class LatticeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: Literal["T4", "K3"] = "T4"
    classes: Optional[List[List[int]]] = Field(
        None, description="Class vectors of [beta_j/2pi] in the K3 lattice (K3 mode only)"
    )
    rank: Optional[int] = Field(None, ge=1, description="Rank r of the bundle (K3 mode only)")

    @model_validator(mode="after")
    def k3_needs_classes(self) -> "LatticeConfig":
        if self.name == "K3":
            if self.classes is None or len(self.classes) != 3 or any(len(c) != 22 for c in self.classes):
                raise ValueError("K3 mode needs three class vectors of length 22")
            if self.rank is None:
                raise ValueError("K3 mode needs the bundle rank")
        return self


class ScenarioConfig(BaseModel):
    """Declarative description of a torus-bundle scenario (JSON)."""

    model_config = ConfigDict(extra="forbid")

    name: str = "scenario"
    side_lengths: List[float] = [1.0, 1.0, 1.0, 1.0]
    grid: int = Field(default_factory=lambda: settings.DEFAULT_GRID)
    beta_periods: List[List[int]] = Field(
        ..., description="3 x 6 integer periods in the order (01, 23, 02, 31, 03, 12)"
    )
    t_squared: str = "1"
    alpha: Optional[str] = None
    instantons: Optional[InstantonConfig] = None
    require_balance: bool = True
    u_mode: Literal["constant", "solved", "prescribed"] = "constant"
    u_modes: List[FourierMode] = []
    h0: float = Field(default_factory=lambda: settings.DEFAULT_H0, gt=0)
    lattice: LatticeConfig = LatticeConfig()

    @field_validator("t_squared", "alpha", mode="before")
    @classmethod
    def rational_text(cls, v):
        if v is None:
            return v
        try:
            return str(parse_rational(v))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {v!r}") from exc

    @field_validator("side_lengths")
    @classmethod
    def four_positive(cls, v: List[float]) -> List[float]:
        if len(v) != 4 or min(v) <= 0:
            raise ValueError("need four positive side lengths")
        return v

    @field_validator("grid")
    @classmethod
    def power_of_two(cls, v: int) -> int:
        if v < 2 or v & (v - 1):
            raise ValueError("grid must be a power of two")
        return v

    @field_validator("beta_periods")
    @classmethod
    def three_by_six(cls, v: List[List[int]]) -> List[List[int]]:
        if len(v) != 3 or any(len(row) != 6 for row in v):
            raise ValueError("beta_periods must be a 3 x 6 integer matrix")
        return v

    @model_validator(mode="after")
    def check_values(self) -> "ScenarioConfig":
        if self.t_fraction <= 0:
            raise ValueError("t_squared must be positive")
        if self.alpha is not None and self.alpha_fraction == 0:
            raise ValueError("alpha must be non-zero")
        if self.u_mode == "prescribed" and not self.u_modes:
            raise ValueError("prescribed u_mode needs at least one Fourier mode")
        return self

    @property
    def t_fraction(self) -> Fraction:
        return parse_rational(self.t_squared)

    @property
    def alpha_fraction(self) -> Optional[Fraction]:
        return None if self.alpha is None else parse_rational(self.alpha)


class RunConfig(BaseModel):
    """One CLI invocation."""

    model_config = ConfigDict(extra="forbid")

    command: Literal["verify-algebra", "ellipticity", "solve", "verify", "tdual", "lattice-check", "report"]
    config: Optional[str] = Field(None, description="Path of the scenario JSON file")
    grid: Optional[int] = None
    seed: int = 0
    tol_scale: float = Field(1.0, gt=0)
    out: Optional[str] = None
    samples: Optional[int] = Field(None, ge=1)
    field_out: Optional[str] = None

    @field_validator("grid")
    @classmethod
    def power_of_two(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and (v < 2 or v & (v - 1)):
            raise ValueError("grid must be a power of two")
        return v
