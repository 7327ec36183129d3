from __future__ import annotations

from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.models import RationalField
from core.regularity import ModelKind


# --- Generator specification -------------------------------------------------
class GenRanges(BaseModel):
    """
    Inclusive integer ranges for random coefficients.

    Lot sizing: holding/production/setup costs, demand, setup resource use.
    Facility location: transport cost and fixed opening cost.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    holding: Tuple[int, int] = (1, 10)
    production: Tuple[int, int] = (1, 10)
    setup: Tuple[int, int] = (1, 100)
    demand: Tuple[int, int] = (1, 10)
    setup_resource: Tuple[int, int] = (1, 5)
    transport: Tuple[int, int] = (1, 50)
    fixed: Tuple[int, int] = (10, 200)
    a_choices: List[int] = Field(default_factory=lambda: [2, 3, 4, 5])
    resource_factor: RationalField = Fraction(3, 2)
    capacity_factor: RationalField = Fraction(13, 10)

    @field_validator("holding", "production", "setup", "demand", "setup_resource", "transport", "fixed")
    @classmethod
    def _check_range(cls, v: Tuple[int, int]) -> Tuple[int, int]:
        lo, hi = v
        if lo < 1 or lo > hi:
            raise ValueError(f"range {v} must satisfy 1 <= lo <= hi")
        return v

    @field_validator("a_choices")
    @classmethod
    def _check_choices(cls, v: List[int]) -> List[int]:
        if not v or any(a < 1 for a in v):
            raise ValueError("a_choices must be a nonempty list of positive integers")
        return v

    @field_validator("resource_factor", "capacity_factor")
    @classmethod
    def _check_factor(cls, v: Fraction) -> Fraction:
        if v < 1:
            raise ValueError("capacity factors must be at least 1")
        return v


class GenSpec(BaseModel):
    """
    What to generate. For lot sizing `mu` is the number of items and `eta`
    the number of periods; for facility location they are clients and
    facilities. CLS is single item.
    """

    model: ModelKind
    mu: int = Field(..., ge=1)
    eta: int = Field(..., ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    ranges: GenRanges = Field(default_factory=GenRanges)

    @model_validator(mode="after")
    def _check_cls(self) -> "GenSpec":
        if self.model == ModelKind.CLS and self.mu != 1:
            raise ValueError("CLS instances have exactly one item")
        return self

    def instance_name(self) -> str:
        return f"{self.model.value.lower()}_{self.mu}x{self.eta}_s{self.seed}"


# --- Experiment records --------------------------------------------------------
class RunState(str, Enum):
    timelimit = "timelimit"
    finished_opt = "finished_opt"
    finished_nosol = "finished_nosol"
    finished_subopt = "finished_subopt"


class RunRecord(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    instance: str
    variant: str
    state: RunState
    value: Optional[RationalField] = None
    oracle_value: RationalField
    nodes: int
    time_sec: float

    def csv_row(self) -> List[str]:
        return [
            self.instance,
            self.variant,
            self.state.value,
            "" if self.value is None else str(self.value),
            str(self.oracle_value),
            str(self.nodes),
            f"{self.time_sec:.6f}",
        ]


CSV_COLUMNS = ["instance", "variant", "state", "value", "oracle_value", "nodes", "time_sec"]


class ExperimentSummary(BaseModel):
    variants: List[str] = Field(default_factory=list)
    # variant -> state -> count, every state present
    state_counts: Dict[str, Dict[str, int]] = Field(default_factory=dict)
    # instance -> variant -> nodes (scatter data)
    nodes: Dict[str, Dict[str, int]] = Field(default_factory=dict)
    excluded: List[str] = Field(default_factory=list)
    # generated instances dropped because no variant finished within the limits
    skipped: List[str] = Field(default_factory=list)
    reference_variant: Optional[str] = None
    # eps variant -> geometric mean of reference/eps node counts over co-finished instances
    node_ratio: Dict[str, Optional[float]] = Field(default_factory=dict)


class ExperimentResult(BaseModel):
    records: List[RunRecord] = Field(default_factory=list)
    summary: ExperimentSummary = Field(default_factory=ExperimentSummary)


__all__ = [
    "GenRanges",
    "GenSpec",
    "RunState",
    "RunRecord",
    "CSV_COLUMNS",
    "ExperimentSummary",
    "ExperimentResult",
]
