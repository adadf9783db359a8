import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.core.config import settings
from src.core.covariance import QUARTER, CorrelationMatrix
from src.core.errors import CoverageError, DomainError
from src.core.grid import PhaseGrid, QGrid
from src.core.params import SystemParams

NORM_TOL = 1e-9

PhasePoint = tuple[float, float]


class PointerFamily(BaseModel):
    """Gaussian pointer states psi(q) ~ exp(-alpha (q-x)^2/4 + i p (q-x)).

    The width parameter is alpha = alpha_re + i alpha_im with alpha_re > 0.
    """

    model_config = ConfigDict(frozen=True)

    alpha_re: float = Field(gt=0.0)
    alpha_im: float = 0.0
    params: SystemParams

    @property
    def alpha(self) -> complex:
        return complex(self.alpha_re, self.alpha_im)

    @property
    def position_std(self) -> float:
        return 1.0 / math.sqrt(self.alpha_re)

    def label(self) -> str:
        return f"alpha={self.alpha_re:.6g}{self.alpha_im:+.6g}i"


@dataclass(frozen=True, slots=True, eq=False)
class Wavefunction:
    q_grid: QGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex, copy=True)
        if values.shape != (self.q_grid.n,):
            raise DomainError(f"wavefunction has {values.shape} samples, grid has {self.q_grid.n}")
        norm = self.norm_of(values)
        if abs(norm - 1.0) > NORM_TOL:
            raise DomainError(
                f"wavefunction norm {norm:.12f} differs from 1 by more than {NORM_TOL:g}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def norm_of(self, values: np.ndarray) -> float:
        return float(np.sum(np.abs(values) ** 2) * self.q_grid.dq)

    def inner(self, other: "Wavefunction") -> complex:
        """<self|other> by quadrature on the shared grid."""
        if not self.q_grid.same_as(other.q_grid):
            raise DomainError("wavefunctions live on different position grids")
        return complex(np.vdot(self.values, other.values) * self.q_grid.dq)


def make_family(alpha: complex, params: SystemParams) -> PointerFamily:
    alpha = complex(alpha)
    if not alpha.real > 0.0:
        raise DomainError(
            f"Re(alpha) must be positive for a normalizable pointer state, got {alpha}"
        )
    return PointerFamily(alpha_re=alpha.real, alpha_im=alpha.imag, params=params)


def c_quarter(family: PointerFamily) -> CorrelationMatrix:
    """Quantum uncertainty matrix of the pointer states; its determinant is 1/4 for every alpha."""
    a_re, a_im = family.alpha_re, family.alpha_im
    if not a_re > 0.0:
        raise DomainError(f"Re(alpha) must be positive, got {a_re}")
    modulus_sq = a_re * a_re + a_im * a_im
    return CorrelationMatrix(1.0 / a_re, -0.5 * a_im / a_re, 0.25 * modulus_sq / a_re)


def robust_alpha(params: SystemParams) -> PointerFamily:
    """Robust pointer family alpha_0 = (1 - i) sqrt(2 D m)."""
    scale = math.sqrt(2.0 * params.D * params.m)
    return PointerFamily(alpha_re=scale, alpha_im=-scale, params=params)


def family_from_matrix(
    c: CorrelationMatrix, params: SystemParams, *, tol: float = 1e-10
) -> PointerFamily:
    """Pointer family whose uncertainty matrix is ``c`` (positive, det 1/4)."""
    if not c.is_positive_definite():
        raise DomainError(f"uncertainty matrix must be positive definite, got {c}")
    if abs(c.det - QUARTER) > tol:
        raise DomainError(f"uncertainty matrix must have determinant 1/4, got {c.det:.12g}")
    return PointerFamily(alpha_re=1.0 / c.cxx, alpha_im=-2.0 * c.cxp / c.cxx, params=params)


def pointer_wavefunction(
    family: PointerFamily,
    gamma: PhasePoint,
    q_grid: QGrid,
    *,
    n_sigma: float | None = None,
) -> Wavefunction:
    x, p = gamma
    n_sigma = settings.coverage_sigmas if n_sigma is None else n_sigma
    reach = n_sigma * family.position_std
    if x - reach < q_grid.q_min or x + reach > q_grid.q_max:
        raise CoverageError(
            f"position grid does not span {n_sigma:g} standard deviations around x={x:g}",
            required={"q_min": x - reach, "q_max": x + reach},
        )
    return Wavefunction(q_grid=q_grid, values=_pointer_samples(family, x, p, q_grid.q))


def overlap_sq(family: PointerFamily, gamma1: PhasePoint, gamma2: PhasePoint) -> float:
    """|<Gamma|Gamma'>|^2 = exp(-dGamma^T (4 C_1/4)^{-1} dGamma)."""
    inv = c_quarter(family).inverse()
    dx, dp = gamma1[0] - gamma2[0], gamma1[1] - gamma2[1]
    return float(np.exp(-0.25 * inv.quadratic_form(np.float64(dx), np.float64(dp))))


def completeness_residual(family: PointerFamily, gamma_grid: PhaseGrid, q_grid: QGrid) -> float:
    """sup |dq * sum_Gamma psi_Gamma(q) psi_Gamma*(q') dGamma - I| on the position grid.

    The momentum sum collapses to a Dirichlet kernel in q - q'; it is an exact
    discrete delta when the Gamma grid spans 2 pi / dq in momentum.
    """
    q = q_grid.q
    centres = gamma_grid.x
    envelopes = np.stack(
        [_pointer_samples(family, float(x0), 0.0, q) for x0 in centres], axis=1
    )
    position_part = (envelopes @ envelopes.conj().T) * gamma_grid.dx
    offsets = np.arange(-(q_grid.n - 1), q_grid.n)
    dirichlet = np.exp(1j * np.outer(offsets * q_grid.dq, gamma_grid.p)).sum(axis=1)
    index = np.arange(q_grid.n)
    momentum_part = dirichlet[index[:, None] - index[None, :] + q_grid.n - 1]
    kernel = position_part * momentum_part * gamma_grid.dp / (2.0 * np.pi)
    return float(np.abs(kernel * q_grid.dq - np.eye(q_grid.n)).max())


def _pointer_samples(family: PointerFamily, x: float, p: float, q: np.ndarray) -> np.ndarray:
    shifted = q - x
    amplitude = (family.alpha_re / (2.0 * np.pi)) ** 0.25
    return amplitude * np.exp(-family.alpha * shifted * shifted / 4.0 + 1j * p * shifted)
