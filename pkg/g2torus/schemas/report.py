from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class ResidualEntry(BaseModel):
    name: str
    value: float
    tolerance: float
    passed: bool
    anchor: str = Field(..., description="The identity being checked")
    relative: Optional[float] = None

    @classmethod
    def check(cls, name: str, value: float, tolerance: float, anchor: str,
              reference: Optional[float] = None) -> "ResidualEntry":
        relative = value / reference if reference else None
        return cls(name=name, value=float(value), tolerance=float(tolerance),
                   passed=bool(value < tolerance), anchor=anchor, relative=relative)


class ExactnessEntry(BaseModel):
    label: str
    rank_in: int
    dim_ker_out: int
    containment_defect: float
    composition_norm: float
    exact: bool


class ConstraintCertificateReport(BaseModel):
    lattice: str
    t_squared: str
    alpha: str
    r: int
    q_values: List[int]
    ratio: str
    integrality_ok: bool
    rank_ok: bool
    rank_bound_enforced: bool
    c2_base: int
    c2_target: str
    exact: bool
    c1_vanishes: bool = True


class SolutionReport(BaseModel):
    scenario: str
    grid: int
    t_squared: str
    alpha: str
    u_mode: str
    phi_norm: float
    torsion_norm: float
    obstruction_integral: float
    residuals: List[ResidualEntry]
    torsion_summary: Dict[str, float] = {}
    certificate: Optional[ConstraintCertificateReport] = None
    h_summary: Dict[str, Any] = {}

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.residuals)


class DualityReport(BaseModel):
    original: SolutionReport
    dual: SolutionReport
    identity: List[ResidualEntry]
    pairing_matrix: List[List[str]]
    pairing_nondegenerate: bool


class RunReport(BaseModel):
    schema_version: str
    command: str
    seed: int
    generated_at: datetime
    config: Dict[str, Any] = {}
    residuals: List[ResidualEntry] = []
    sections: Dict[str, Any] = {}
    passed: bool = True
    worst_offender: Optional[ResidualEntry] = None

    class Config:
        json_encoders = {
            datetime: lambda v: v.isoformat()
        }
