from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

Command = Literal[
    "evolve", "certify-w", "certify-p", "decoherence-times", "sweep", "oracle-compare"
]
StateName = Literal["vacuum", "fock1", "cat", "gaussian"]


class RunConfig(BaseModel):
    """One CLI run. Lengths are in units of sigma0, momenta 1/sigma0 and times t0."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    out: str | None = None

    m: float = Field(default=1.0, gt=0.0)
    d: float = Field(default=1.0, gt=0.0)
    alpha_re: float | None = Field(default=None, gt=0.0)
    alpha_im: float | None = None

    state: StateName = "cat"
    sep: float = Field(default=6.0, gt=0.0)

    grid: int | None = Field(default=None, ge=8)
    x_extent: float | None = Field(default=None, gt=0.0)
    p_extent: float | None = Field(default=None, gt=0.0)

    t: float | None = Field(default=None, ge=0.0)
    probes: int | None = Field(default=None, ge=2)
    t_probe_min: float | None = Field(default=None, gt=0.0)
    t_probe_max: float | None = Field(default=None, gt=0.0)

    m_values: list[float] | None = None
    d_values: list[float] | None = None
    alphas: list[tuple[float, float]] | None = None

    @model_validator(mode="after")
    def _command_keys(self) -> "RunConfig":
        missing = []
        if self.command == "sweep":
            missing += [key for key in ("m_values", "d_values") if not getattr(self, key)]
        if self.command in {"evolve", "oracle-compare"} and self.t is None:
            missing.append("t")
        if missing:
            raise ValueError(f"missing config keys for {self.command}: {', '.join(missing)}")
        if self.alpha_re is None and self.alpha_im is not None:
            raise ValueError("alpha_im needs alpha_re")
        for key in ("m_values", "d_values"):
            values = getattr(self, key) or []
            if any(value <= 0.0 for value in values):
                raise ValueError(f"{key} must be positive")
        return self
