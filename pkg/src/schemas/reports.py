from pydantic import BaseModel, Field, model_validator


class NegativityReport(BaseModel):
    min_value: float
    min_location: tuple[float, float]
    negative_volume: float = Field(ge=0.0)
    epsilon: float = Field(ge=0.0)
    certified_positive: bool

    @model_validator(mode="after")
    def _certificate_matches_minimum(self) -> "NegativityReport":
        if self.certified_positive != (self.min_value >= -self.epsilon):
            raise ValueError("certified_positive must equal (min_value >= -epsilon)")
        return self


class ProbeRecord(BaseModel):
    t: float
    min_value: float | None
    negative_volume: float | None
    certified: bool | None
    status: str = "ok"


class FamilyInfo(BaseModel):
    alpha_re: float
    alpha_im: float
    c_quarter: tuple[float, float, float]
    admissible: bool


class Thresholds(BaseModel):
    wigner: float
    p_function: float | None = None
    factorization: float | None = None


class TheoremReport(BaseModel):
    theorem: str
    state: str
    family: FamilyInfo | None = None
    params: dict[str, float]
    thresholds: Thresholds
    empirical_crossing: float | None
    bound_respected: bool
    probes: list[ProbeRecord]


class RelationReport(BaseModel):
    """C_1/4 against D t0^2 / 2 for one pointer family."""

    c_quarter: tuple[float, float, float]
    half_diffusion_t0_sq: tuple[float, float, float]
    max_abs_discrepancy: float
    holds: bool


class TraceRow(BaseModel):
    t: float
    min_value: float
    norm: float
    p2: float
