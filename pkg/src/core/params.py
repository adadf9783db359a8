import math
from dataclasses import dataclass

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.core.covariance import CorrelationMatrix
from src.core.errors import DomainError


class SystemParams(BaseModel):
    """Free particle of mass m under position decoherence of strength D (hbar = 1)."""

    model_config = ConfigDict(frozen=True)

    m: float = Field(gt=0.0)
    D: float = Field(gt=0.0)

    @property
    def sigma0(self) -> float:
        return (self.D * self.m) ** -0.25

    @property
    def t0(self) -> float:
        return math.sqrt(self.m / self.D)

    def shear_matrix(self, t: float) -> list[list[float]]:
        return [[1.0, t / self.m], [0.0, 1.0]]


def make_params(m: float, D: float) -> SystemParams:
    if not (math.isfinite(m) and math.isfinite(D)) or m <= 0.0 or D <= 0.0:
        raise DomainError(f"mass and decoherence strength must be positive, got m={m!r} D={D!r}")
    try:
        return SystemParams(m=m, D=D)
    except ValidationError as exc:
        raise DomainError(str(exc)) from exc


def cw_of_t(params: SystemParams, t: float) -> CorrelationMatrix:
    """Coarse-graining covariance accumulated by the Wigner Fokker-Planck flow after time t.

    C_W(t) = D t [[t^2/3m^2, t/2m], [t/2m, 1]], with |C_W(t)| = D^2 t^4 / 12 m^2.
    """
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"time must be non-negative, got t={t!r}")
    m, dt = params.m, params.D * t
    return CorrelationMatrix(dt * t * t / (3.0 * m * m), dt * t / (2.0 * m), dt)


@dataclass(frozen=True, slots=True)
class Units:
    """Scales mapping physical (x, p, t) to units where m = D = 1."""

    sigma0: float
    t0: float

    @property
    def p_scale(self) -> float:
        return 1.0 / self.sigma0

    def to_natural(self, x: float, p: float, t: float) -> tuple[float, float, float]:
        return x / self.sigma0, p * self.sigma0, t / self.t0

    def from_natural(self, x: float, p: float, t: float) -> tuple[float, float, float]:
        return x * self.sigma0, p / self.sigma0, t * self.t0

    def correlation_to_natural(self, c: CorrelationMatrix) -> CorrelationMatrix:
        s2 = self.sigma0 * self.sigma0
        return CorrelationMatrix(c.cxx / s2, c.cxp, c.cpp * s2)


def nondimensionalize(params: SystemParams) -> Units:
    return Units(sigma0=params.sigma0, t0=params.t0)
