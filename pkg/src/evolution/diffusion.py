import math
from dataclasses import dataclass

import numpy as np

from src.core.covariance import CorrelationMatrix
from src.core.errors import DomainError
from src.core.params import SystemParams
from src.schemas.reports import RelationReport
from src.states.pointer import PointerFamily, c_quarter

ADMISSIBLE_TOL = 1e-12
RELATION_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class DiffusionMatrix:
    """Diffusion matrix of the pointer-state Fokker-Planck flow of P.

    dxx = -alpha_I/(m alpha_R), dxp = |alpha|^2/(4 m alpha_R), dpp = D. Only a
    positive semidefinite matrix gives a Fokker-Planck (diffusive) reading.
    """

    dxx: float
    dxp: float
    dpp: float
    mass: float

    @property
    def det(self) -> float:
        return self.dxx * self.dpp - self.dxp * self.dxp

    @property
    def admissible(self) -> bool:
        return self.as_correlation().is_psd(ADMISSIBLE_TOL)

    def as_correlation(self) -> CorrelationMatrix:
        return CorrelationMatrix(self.dxx, self.dxp, self.dpp)

    def eigvals(self) -> np.ndarray:
        return self.as_correlation().eigvals()

    def at_time(self, t: float) -> CorrelationMatrix:
        """Time-averaged matrix D(t); the P kernel after time t is t * D(t)."""
        if not math.isfinite(t) or t < 0.0:
            raise DomainError(f"time must be non-negative, got t={t!r}")
        m = self.mass
        return CorrelationMatrix(
            self.dxx + self.dxp * t / m + self.dpp * t * t / (3.0 * m * m),
            self.dxp + self.dpp * t / (2.0 * m),
            self.dpp,
        )

    def kernel(self, t: float) -> CorrelationMatrix:
        return self.at_time(t) * t


def diffusion_matrix(family: PointerFamily) -> DiffusionMatrix:
    if not family.alpha_re > 0.0:
        raise DomainError(f"Re(alpha) must be positive, got {family.alpha_re}")
    params = family.params
    a_re, a_im, m = family.alpha_re, family.alpha_im, params.m
    modulus_sq = a_re * a_re + a_im * a_im
    return DiffusionMatrix(
        dxx=-a_im / (m * a_re),
        dxp=modulus_sq / (4.0 * m * a_re),
        dpp=params.D,
        mass=m,
    )


def pointer_diffusion_relation(params: SystemParams, family: PointerFamily) -> RelationReport:
    """Compare C_1/4 with D t0^2 / 2 entrywise; equality is not assumed."""
    if family.params != params:
        raise DomainError("pointer family was built for different system parameters")
    quarter = c_quarter(family)
    scaled = diffusion_matrix(family).as_correlation() * (0.5 * params.t0 * params.t0)
    discrepancy = quarter.max_abs_diff(scaled)
    return RelationReport(
        c_quarter=(quarter.cxx, quarter.cxp, quarter.cpp),
        half_diffusion_t0_sq=(scaled.cxx, scaled.cxp, scaled.cpp),
        max_abs_discrepancy=discrepancy,
        holds=discrepancy <= RELATION_TOL * max(1.0, abs(quarter.cxx), abs(quarter.cpp)),
    )
