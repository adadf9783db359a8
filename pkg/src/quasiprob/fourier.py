from dataclasses import dataclass

import numpy as np
from scipy import fft

from src.core.config import settings
from src.core.covariance import CorrelationMatrix
from src.core.errors import DomainError
from src.core.grid import FieldKind, GridField, PhaseGrid


@dataclass(frozen=True, slots=True, eq=False)
class SpectralField:
    """Symplectic transform F(kx, kp) in FFT order, with (kx, kp) = (p~, -x~)."""

    grid: PhaseGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=complex, copy=True)
        if values.shape != self.grid.shape:
            raise DomainError(
                f"spectrum shape {values.shape} does not match grid {self.grid.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def kx(self) -> np.ndarray:
        return self.grid.angular_frequencies()[0]

    @property
    def kp(self) -> np.ndarray:
        return self.grid.angular_frequencies()[1]

    def gaussian_symbol(self, c: CorrelationMatrix) -> np.ndarray:
        """exp(-Gamma~^T C Gamma~ / 2), the transform of g(.; C)."""
        return np.exp(-0.5 * c.quadratic_form(self.kx[:, None], self.kp[None, :]))


def _origin_phase(grid: PhaseGrid) -> np.ndarray:
    kx, kp = grid.angular_frequencies()
    return np.exp(-1j * (kx[:, None] * grid.x_min + kp[None, :] * grid.p_min))


def symplectic_fourier(f: GridField) -> SpectralField:
    """F(Gamma~) = int f(Gamma) exp(-i Gamma~^T Gamma) dGamma with Gamma~^T Gamma = p~ x - x~ p."""
    grid = f.grid
    spectrum = fft.fft2(f.values, workers=settings.worker_count)
    return SpectralField(grid=grid, values=spectrum * _origin_phase(grid) * grid.cell)


def inverse_symplectic_fourier(
    spectrum: SpectralField, *, kind: FieldKind = FieldKind.generic
) -> GridField:
    grid = spectrum.grid
    shifted = spectrum.values / (_origin_phase(grid) * grid.cell)
    values = fft.ifft2(shifted, workers=settings.worker_count)
    return GridField(grid=grid, values=values.real, kind=kind)
