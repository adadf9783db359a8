import math

import numpy as np
from scipy import fft, signal

from src.core.config import settings
from src.core.errors import CoverageError, DomainError
from src.core.grid import FieldKind, GridField, PhaseGrid, QGrid
from src.core.log import get_logger
from src.states.density import DensityMatrix

logger = get_logger(__name__)

IMAG_TOL = 1e-10
ALIGN_TOL = 1e-9
ALIAS_TOL = 1e-8
ALIAS_RIM = 0.9


def phase_grid_for(
    q_grid: QGrid, p_extent: float | None = None, *, n_p: int | None = None
) -> PhaseGrid:
    """Phase grid whose x samples coincide with ``q_grid`` (n must be a power of two)."""
    p_extent = settings.grid_p_extent if p_extent is None else p_extent
    x_max = q_grid.q_min + q_grid.n * q_grid.dq
    return PhaseGrid(q_grid.n, n_p or q_grid.n, q_grid.q_min, x_max, -p_extent, p_extent)


def wigner_from_density(rho: DensityMatrix, grid: PhaseGrid) -> GridField:
    """W(x, p) = int <x - r/2|rho|x + r/2> e^{ipr} dr sampled on ``grid``.

    rho is refined to spacing dq/2 by band-limited resampling so every x on
    the half-step lattice has anti-diagonal samples at r = n*dq; the r-sum is
    then a direct discrete Fourier sum evaluated at the grid momenta.
    """
    q_grid = rho.q_grid
    dq = q_grid.dq
    p_reach = max(abs(grid.p_min), abs(grid.p_max))
    if dq > math.pi / p_reach:
        raise CoverageError(
            "position spacing aliases the momentum range",
            required={"dq_max": math.pi / p_reach},
        )
    require_vanishing_edges(rho)
    half_steps = (grid.x - q_grid.q_min) / (0.5 * dq)
    centres = np.rint(half_steps).astype(int)
    misaligned = np.abs(half_steps - centres).max() > ALIGN_TOL
    if misaligned or centres.min() < 0 or centres.max() > 2 * (q_grid.n - 1):
        raise CoverageError(
            "phase-grid x samples must lie on the half-step lattice inside the position grid",
            required={"x_min": q_grid.q_min, "x_max": q_grid.q_max},
        )

    refined_n = 2 * q_grid.n
    refined = signal.resample(signal.resample(rho.entries, refined_n, axis=0), refined_n, axis=1)
    offsets = np.arange(-(refined_n - 1), refined_n)
    rows = centres[:, None] - offsets[None, :]
    cols = centres[:, None] + offsets[None, :]
    valid = (rows >= 0) & (rows < refined_n) & (cols >= 0) & (cols < refined_n)
    anti_diagonals = np.where(
        valid, refined[np.clip(rows, 0, refined_n - 1), np.clip(cols, 0, refined_n - 1)], 0.0
    )
    phases = np.exp(1j * np.outer(offsets * dq, grid.p))
    transformed = (anti_diagonals @ phases) * dq

    peak = float(np.abs(transformed.real).max())
    residue = float(np.abs(transformed.imag).max())
    if residue > IMAG_TOL * max(peak, 1.0):
        logger.warning("[quasi] wigner imaginary residue=%.3e peak=%.3e", residue, peak)
    return GridField(
        grid=grid, values=transformed.real, kind=FieldKind.wigner, meta={"imag_residue": residue}
    )


def density_from_wigner(w: GridField, q_grid: QGrid) -> DensityMatrix:
    """Invert the Wigner transform: rho(x - r/2, x + r/2) = int W(x, p) e^{-ipr} dp / 2pi.

    The momentum sum is periodic in r with period 2pi/dp. Separations with
    |r| >= pi/dp are set to zero, and the state must have decayed before
    that half period or a CoverageError is raised.
    """
    total = w.integral()
    if not math.isfinite(total) or abs(total - 1.0) > settings.normalization_tol:
        raise DomainError(
            f"Wigner field integrates to {total:.10f}, cannot build a unit-trace state"
        )
    grid = w.grid
    if not math.isclose(q_grid.dq, grid.dx, rel_tol=1e-12):
        raise DomainError("position spacing must equal the phase-grid x spacing")
    lattice = (q_grid.q - grid.x_min) / grid.dx
    index = np.rint(lattice).astype(int)
    if np.abs(lattice - index).max() > ALIGN_TOL or index.min() < 0 or index.max() >= grid.n_x:
        raise CoverageError(
            "position grid must be a sub-lattice of the phase-grid x samples",
            required={"x_min": q_grid.q_min, "x_max": q_grid.q_max},
        )

    # midpoints (q_k + q_l)/2 fall on the half-step lattice of x
    refined = signal.resample(w.values, 2 * grid.n_x, axis=0)
    offsets = np.arange(-(q_grid.n - 1), q_grid.n)
    separations = np.abs(offsets * q_grid.dq)
    kernel = np.exp(-1j * np.outer(grid.p, offsets * q_grid.dq)) * (grid.dp / (2.0 * np.pi))
    table = refined @ kernel

    half_period = math.pi / grid.dp
    inside = separations < half_period
    if not inside.all():
        rim = inside & (separations >= ALIAS_RIM * half_period)
        peak = float(np.abs(table).max())
        if rim.any() and float(np.abs(table[:, rim]).max()) > ALIAS_TOL * peak:
            raise CoverageError(
                "momentum spacing aliases the coherence length of the state",
                required={"dp_max": math.pi / ((q_grid.n - 1) * q_grid.dq)},
            )
        table[:, ~inside] = 0.0

    midpoint = index[:, None] + index[None, :]
    separation = (np.arange(q_grid.n)[None, :] - np.arange(q_grid.n)[:, None]) + q_grid.n - 1
    return DensityMatrix(q_grid=q_grid, entries=table[midpoint, separation]).validate()


def scaled_density(rho: DensityMatrix, a: float) -> DensityMatrix:
    """State psi'(x) = a^{-1/2} psi(x/a) on the same position grid.

    rho'(x, y) = rho(x/a, y/a)/a is read off the trigonometric interpolant of
    rho; points x/a beyond the grid count as zero.
    """
    if not a > 0.0:
        raise DomainError(f"scale factor must be positive, got {a}")
    q_grid = rho.q_grid
    interp = _interpolation_matrix(q_grid.q_min, q_grid.dq, q_grid.n, q_grid.q / a)
    entries = interp @ fft.fft2(rho.entries, workers=settings.worker_count) @ interp.T / a
    entries = 0.5 * (entries + entries.conj().T)
    return DensityMatrix(q_grid=q_grid, entries=entries).validate()


def wigner_invariance_check(
    rho: DensityMatrix, a: float, *, grid: PhaseGrid | None = None
) -> float:
    """sup |W'(x, p) - W(x/a, a p)| for the scaled state psi'(x) = a^{-1/2} psi(x/a).

    Both Wigner functions are computed on the same grid; W is then
    interpolated onto the scaled sample points.
    """
    if not a > 0.0:
        raise DomainError(f"scale factor must be positive, got {a}")
    if a == 1.0:
        return 0.0
    grid = grid or phase_grid_for(rho.q_grid)
    original = wigner_from_density(rho, grid)
    scaled = wigner_from_density(scaled_density(rho, a), grid)
    rows = _interpolation_matrix(grid.x_min, grid.dx, grid.n_x, grid.x / a)
    cols = _interpolation_matrix(grid.p_min, grid.dp, grid.n_p, grid.p * a)
    spectrum = fft.fft2(original.values, workers=settings.worker_count)
    expected = np.real(rows @ spectrum @ cols.T)
    distance = float(np.abs(scaled.values - expected).max())
    logger.debug("[quasi] invariance a=%.6g sup_distance=%.3e", a, distance)
    return distance


def _interpolation_matrix(
    origin: float, spacing: float, n: int, targets: np.ndarray
) -> np.ndarray:
    """Rows evaluate the trigonometric interpolant of n FFT coefficients at ``targets``."""
    frequencies = fft.fftfreq(n, d=spacing)
    matrix = np.exp(2j * np.pi * np.outer(targets - origin, frequencies)) / n
    last = origin + (n - 1) * spacing
    outside = (targets < origin - ALIGN_TOL * spacing) | (targets > last + ALIGN_TOL * spacing)
    matrix[outside] = 0.0
    return matrix


def require_vanishing_edges(rho: DensityMatrix) -> None:
    if rho.edge_ratio() > settings.support_tol:
        raise CoverageError(
            "density matrix does not vanish at the position-grid boundary",
            required={"edge_over_peak": settings.support_tol},
        )
