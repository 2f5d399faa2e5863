"""Request/response models of the pricing service.

Unknown keys are rejected everywhere so that configuration mistakes fail
loudly instead of silently pricing the wrong contract.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..cases import CASES, CaseConfig, custom_case, load_case
from ..model import BatesParams
from ..schemes import REFERENCE_N_STEPS
from ..stability import THEOREM_IDS


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class ModelParams(StrictModel):
    """Bates model and contract parameters; "lambda" is accepted for lam."""

    kappa: float
    eta: float
    sigma: float
    rho: float
    r: float
    lam: float = Field(alias="lambda")
    gamma: float
    delta: float
    T: float
    K: float

    def to_params(self) -> BatesParams:
        return BatesParams(**self.model_dump())

    @classmethod
    def from_params(cls, params: BatesParams) -> "ModelParams":
        return cls(**params.as_dict())


class GridSpec(StrictModel):
    m1: int = 200
    m2: int = 100
    smax_mult: float = 8.0
    vmax: float = 5.0
    stretch_s: float | None = None
    stretch_v: float | None = None


class SchemeSpec(StrictModel):
    adaptation: Literal[1, 2, 3] = 1
    family: Literal["mcs", "do"] = "mcs"
    theta: float = 1.0 / 3.0

    def as_tuple(self) -> tuple[int, str, float]:
        return (self.adaptation, self.family, self.theta)


class CaseSelector(StrictModel):
    """Either a named benchmark case or explicit model parameters."""

    case: str | None = None
    model: ModelParams | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.case is None) == (self.model is None):
            raise ValueError("provide exactly one of 'case' or 'model'")
        if self.case is not None and self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}; known cases: {sorted(CASES)}")
        return self

    def to_case_config(self, grid: GridSpec) -> CaseConfig:
        if self.case is not None:
            base = load_case(self.case, m1=grid.m1, m2=grid.m2)
        else:
            base = custom_case(self.model.to_params(), m1=grid.m1, m2=grid.m2)
        return CaseConfig(
            name=base.name,
            params=base.params,
            m1=grid.m1,
            m2=grid.m2,
            smax_mult=grid.smax_mult,
            vmax=grid.vmax,
            stretch_s=grid.stretch_s,
            stretch_v=grid.stretch_v,
        )


class CaseInfo(StrictModel):
    name: str
    params: ModelParams
    lambda_t: float
    stiff_jump: bool
    feller_violated: bool


class CasesResponse(StrictModel):
    cases: list[CaseInfo]


class PriceRequest(CaseSelector):
    grid: GridSpec = GridSpec()
    scheme: SchemeSpec = SchemeSpec()
    n: int = 200
    query_points: list[tuple[float, float]]


class PriceResponse(StrictModel):
    case: str
    scheme: SchemeSpec
    n: int
    query_points: list[tuple[float, float]]
    values: list[float]


class SweepRequest(CaseSelector):
    grid: GridSpec = GridSpec()
    schemes: list[SchemeSpec] = [SchemeSpec()]
    n_values: list[int] | None = None
    n_ref: int = REFERENCE_N_STEPS
    threads: int = 1


class SweepRowModel(StrictModel):
    case: str
    adaptation: int
    family: str
    theta: float
    n: int
    error: float


class SweepResponse(StrictModel):
    rows: list[SweepRowModel]
    csv: str


class EigenvaluesRequest(CaseSelector):
    grid: GridSpec = GridSpec()


class EigenvaluesResponse(StrictModel):
    case: str
    m1: int
    m2: int
    eigenvalues: list[tuple[float, float]]
    max_abs: float
    max_imag: float
    csv: str


class StabilityRequest(StrictModel):
    theorem: Literal[THEOREM_IDS]  # type: ignore[valid-type]
    theta: float = 1.0 / 3.0
    samples: int = 100_000
    seed: int = 0


class StabilityResponse(StrictModel):
    theorem: str
    theta: float
    samples: int
    seed: int
    passed: bool
    max_abs: float | None
    bound: float | None
    witness: dict | None
    details: dict
    text: str
    shard_csv: str


class ConfigDocument(StrictModel):
    """On-disk configuration: a JSON tree with the sections below."""

    case: str | None = None
    model: ModelParams | None = None
    grid: GridSpec = GridSpec()
    scheme: SchemeSpec = SchemeSpec()
    sweep: SweepSection | None = None
    output: OutputSection | None = None


class SweepSection(StrictModel):
    schemes: list[SchemeSpec] | None = None
    n_values: list[int] | None = None
    n_ref: int = REFERENCE_N_STEPS
    threads: int = 1


class OutputSection(StrictModel):
    out: str | None = None
    seed: int = 0


ConfigDocument.model_rebuild()
