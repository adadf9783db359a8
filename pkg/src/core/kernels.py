import math

import numpy as np
from scipy import fft

from src.core.config import settings
from src.core.covariance import CorrelationMatrix
from src.core.errors import CoverageError, DomainError
from src.core.grid import FieldKind, GridField, PhaseGrid
from src.core.log import get_logger

logger = get_logger(__name__)

SupportBox = tuple[float, float, float, float]


def gaussian_kernel(
    c: CorrelationMatrix, grid: PhaseGrid, *, n_sigma: float | None = None
) -> GridField:
    """Sample g(Gamma; C) = |C|^{-1/2} exp(-Gamma^T (2C)^{-1} Gamma) centred at the origin."""
    if not c.is_positive_definite():
        raise DomainError(f"kernel covariance must be positive definite, got {c} (det={c.det:.3e})")
    n_sigma = settings.coverage_sigmas if n_sigma is None else n_sigma
    sx, sp = c.marginal_std()
    box = (-n_sigma * sx, n_sigma * sx, -n_sigma * sp, n_sigma * sp)
    required = _box_dict(box)
    if not _box_fits(grid, box):
        raise CoverageError(
            f"grid does not cover {n_sigma:g} standard deviations of the kernel", required=required
        )
    x, p = grid.mesh()
    inv = c.inverse()
    exponent = -0.5 * inv.quadratic_form(x, p)
    values = np.exp(exponent) / math.sqrt(c.det)
    meta = {"kernel": _cov_meta(c)}
    return GridField(grid=grid, values=values, kind=FieldKind.generic, meta=meta)


def support_sigmas(tol: float | None = None) -> float:
    """Distance in standard deviations at which a Gaussian falls to ``tol`` of its peak."""
    tol = settings.support_tol if tol is None else tol
    return math.sqrt(2.0 * math.log(1.0 / tol))


def spectral_form(c: CorrelationMatrix, grid: PhaseGrid) -> np.ndarray:
    """k^T C k on the rfft2 frequency layout of ``grid``."""
    kx = 2.0 * np.pi * fft.fftfreq(grid.n_x, d=grid.dx)
    kp = 2.0 * np.pi * fft.rfftfreq(grid.n_p, d=grid.dp)
    return c.quadratic_form(kx[:, None], kp[None, :])


def spectral_multiplier(c: CorrelationMatrix, grid: PhaseGrid, *, sign: float = -1.0) -> np.ndarray:
    """exp(sign/2 * k^T C k) on the rfft2 frequency layout of ``grid``."""
    return np.exp(0.5 * sign * spectral_form(c, grid))


def support_box(
    f: GridField, *, tol: float | None = None, t_over_m: float = 0.0
) -> SupportBox | None:
    """Bounding box of {|f| > tol*max|f|} after the shear x -> x + p*t/m.

    Returns None for an identically zero field.
    """
    tol = settings.support_tol if tol is None else tol
    peak = f.max_abs()
    if peak == 0.0:
        return None
    mask = np.abs(f.values) > tol * peak
    grid = f.grid
    x, p = grid.x, grid.p
    rows = np.flatnonzero(mask.any(axis=0))
    p_lo, p_hi = float(p[rows[0]]), float(p[rows[-1]])
    # per-momentum x extents so the sheared box follows the actual support
    first = np.argmax(mask, axis=0)
    last = grid.n_x - 1 - np.argmax(mask[::-1, :], axis=0)
    x_lo = x[first[rows]] + p[rows] * t_over_m
    x_hi = x[last[rows]] + p[rows] * t_over_m
    return float(x_lo.min()), float(x_hi.max()), p_lo, p_hi


def coverage_bounds(
    f: GridField,
    c: CorrelationMatrix | None = None,
    *,
    t_over_m: float = 0.0,
    n_sigma: float | None = None,
) -> SupportBox | None:
    """Box the sheared support of f occupies once padded by n_sigma kernel deviations."""
    box = support_box(f, t_over_m=t_over_m)
    if box is None:
        return None
    n_sigma = settings.coverage_sigmas if n_sigma is None else n_sigma
    sx, sp = c.marginal_std() if c is not None else (0.0, 0.0)
    x_lo, x_hi, p_lo, p_hi = box
    return x_lo - n_sigma * sx, x_hi + n_sigma * sx, p_lo - n_sigma * sp, p_hi + n_sigma * sp


def require_coverage(
    f: GridField,
    c: CorrelationMatrix | None = None,
    *,
    t_over_m: float = 0.0,
    n_sigma: float | None = None,
    label: str = "convolution",
) -> None:
    """Raise CoverageError unless shear plus Gaussian spread of f stay inside the grid."""
    needed = coverage_bounds(f, c, t_over_m=t_over_m, n_sigma=n_sigma)
    if needed is not None and not _box_fits(f.grid, needed):
        raise CoverageError(
            f"{label} would wrap around the periodic grid",
            required=_box_dict(needed),
        )


def convolve(
    f: GridField,
    c: CorrelationMatrix,
    *,
    kind: FieldKind | None = None,
    psd_tol: float | None = None,
    check_coverage: bool = True,
) -> GridField:
    """Coarse-grain f with g(.; C) spectrally: multiply the transform by exp(-k^T C k / 2).

    Singular (PSD) C smooths only along its non-null eigendirections, which
    the multiplier does without special casing.
    """
    if c.is_zero():
        return f if kind is None or kind == f.kind else f.with_values(f.values, kind=kind)
    psd_tol = settings.psd_tol if psd_tol is None else psd_tol
    if not c.is_psd(psd_tol):
        raise DomainError(
            f"coarse-graining covariance has a negative eigenvalue ({c.min_eigenvalue():.3e})"
        )
    # band-limited fields carry periodic ringing rather than a compact support
    if check_coverage and not f.meta.get("band_limited", False):
        require_coverage(f, c)
    spectrum = fft.rfft2(f.values, workers=settings.worker_count)
    spectrum *= spectral_multiplier(c, f.grid)
    values = fft.irfft2(spectrum, s=f.grid.shape, workers=settings.worker_count)
    logger.debug(
        "[kernel] convolve cxx=%.4g cxp=%.4g cpp=%.4g det=%.4g", c.cxx, c.cxp, c.cpp, c.det
    )
    return f.with_values(values, kind=kind)


def shear(
    f: GridField,
    t_over_m: float,
    *,
    kind: FieldKind | None = None,
    check_coverage: bool = True,
) -> GridField:
    """Free streaming f(x, p) -> f(x - p*t/m, p) by an exact phase ramp on each p-row."""
    if t_over_m == 0.0:
        return f if kind is None or kind == f.kind else f.with_values(f.values, kind=kind)
    if check_coverage:
        require_coverage(f, t_over_m=t_over_m, label="shear")
    grid = f.grid
    kx = 2.0 * np.pi * fft.rfftfreq(grid.n_x, d=grid.dx)
    shifts = grid.p * t_over_m
    spectrum = fft.rfft(f.values, axis=0, workers=settings.worker_count)
    spectrum *= np.exp(-1j * kx[:, None] * shifts[None, :])
    values = fft.irfft(spectrum, n=grid.n_x, axis=0, workers=settings.worker_count)
    return f.with_values(values, kind=kind)


def _box_fits(grid: PhaseGrid, box: SupportBox) -> bool:
    x_lo, x_hi, p_lo, p_hi = box
    x_last = grid.x_max - grid.dx
    p_last = grid.p_max - grid.dp
    slack_x, slack_p = 1e-9 * grid.dx, 1e-9 * grid.dp
    return (
        x_lo >= grid.x_min - slack_x
        and x_hi <= x_last + slack_x
        and p_lo >= grid.p_min - slack_p
        and p_hi <= p_last + slack_p
    )


def _cov_meta(c: CorrelationMatrix) -> dict[str, float]:
    return {"cxx": c.cxx, "cxp": c.cxp, "cpp": c.cpp}


def _box_dict(box: SupportBox) -> dict[str, float]:
    return dict(zip(("x_min", "x_max", "p_min", "p_max"), box, strict=True))
