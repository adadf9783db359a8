import math

import numpy as np
from scipy import fft

from src.core.config import settings
from src.core.errors import CoverageError, DomainError, ThresholdError
from src.core.grid import FieldKind, GridField, PhaseGrid
from src.core.kernels import convolve, require_coverage, shear, spectral_form
from src.core.log import get_logger
from src.core.params import SystemParams, cw_of_t
from src.positivity.thresholds import minimum_admissible_time
from src.states.density import DensityMatrix
from src.states.pointer import PointerFamily, c_quarter
from src.states.wigner import require_vanishing_edges

logger = get_logger(__name__)


def q_from_w(w: GridField, family: PointerFamily) -> GridField:
    """Husimi function Q = g(.; C_1/4) * W."""
    q = convolve(w, c_quarter(family), kind=FieldKind.q)
    return q.with_values(q.values, meta={**w.meta, "family": family.label()})


def q_direct(rho: DensityMatrix, family: PointerFamily, grid: PhaseGrid) -> GridField:
    """Q(Gamma) = <Gamma|rho|Gamma> by quadrature against the pointer wavefunctions.

    rho is split into eigencomponents and each overlap <Gamma|phi_k> is one
    matrix product per component: the x dependence sits in the Gaussian
    envelope, the p dependence in a discrete Fourier sum over q. The
    overall phase e^{ipx} drops out of the modulus.
    """
    q_grid = rho.q_grid
    p_reach = max(abs(grid.p_min), abs(grid.p_max))
    if q_grid.dq > math.pi / p_reach:
        raise CoverageError(
            "position spacing aliases the momentum range",
            required={"dq_max": math.pi / p_reach},
        )
    require_vanishing_edges(rho)

    q = q_grid.q
    weights, vectors = rho.components()
    offsets = q[None, :] - grid.x[:, None]
    envelope = np.exp(-np.conj(family.alpha) * offsets * offsets / 4.0)
    fourier = np.exp(-1j * np.outer(q, grid.p))
    amplitude = (family.alpha_re / (2.0 * np.pi)) ** 0.25 * q_grid.dq

    values = np.zeros(grid.shape)
    for weight, phi in zip(weights, vectors.T):
        overlaps = ((envelope * phi[None, :]) @ fourier) * amplitude
        values += weight * np.abs(overlaps) ** 2
    logger.debug("[quasi] q_direct components=%d family=%s", len(weights), family.label())
    return GridField(grid=grid, values=values, kind=FieldKind.q, meta={"family": family.label()})


def p_from_w(w: GridField, family: PointerFamily, params: SystemParams, t: float) -> GridField:
    """Forward-route P(t) = g(.; C_W(t) - C_1/4) * W0(x - p t/m, p) from the initial W field."""
    if family.params != params:
        raise DomainError("pointer family was built for different system parameters")
    kernel = cw_of_t(params, t) - c_quarter(family)
    if not kernel.is_psd(settings.psd_tol):
        raise ThresholdError(
            f"C_W(t) - C_1/4 is not positive semidefinite at t={t:.6g}",
            t_min=minimum_admissible_time(params, family),
        )
    t_over_m = t / params.m
    require_coverage(w, kernel, t_over_m=t_over_m, label="forward P route")
    sheared = shear(w, t_over_m, check_coverage=False)
    p = convolve(sheared, kernel, kind=FieldKind.p, check_coverage=False)
    logger.info("[quasi] p_from_w t=%.6g kernel_det=%.6g family=%s", t, kernel.det, family.label())
    return p.with_values(
        p.values,
        meta={"family": family.label(), "t": t, "reliable": True, "route": "forward"},
    )


def p_deconvolve(w: GridField, family: PointerFamily, cutoff: float | None = None) -> GridField:
    """Regularized P = exp(+k^T C_1/4 k / 2) W~ kept only where the gain is at most ``cutoff``.

    The result is always flagged unreliable: outside the retained band the
    inverse is undefined and simply dropped.
    """
    cutoff = settings.deconvolution_cutoff if cutoff is None else cutoff
    if not cutoff > 1.0:
        raise DomainError(f"deconvolution cutoff must exceed 1, got {cutoff}")
    exponent = 0.5 * spectral_form(c_quarter(family), w.grid)
    band = exponent <= math.log(cutoff)
    gain = np.where(band, np.exp(np.minimum(exponent, math.log(cutoff))), 0.0)
    spectrum = fft.rfft2(w.values, workers=settings.worker_count) * gain
    values = fft.irfft2(spectrum, s=w.grid.shape, workers=settings.worker_count)
    retained = float(band.mean())
    p = GridField(grid=w.grid, values=values, kind=FieldKind.p, meta={"band_limited": True})
    # residual of re-smoothing the estimate back to W
    band_error = w.sup_distance(convolve(p, c_quarter(family), kind=FieldKind.wigner))
    logger.warning(
        "[quasi] p_deconvolve cutoff=%.3g retained_band=%.4f band_error=%.3e family=%s",
        cutoff,
        retained,
        band_error,
        family.label(),
    )
    return p.with_values(
        values,
        meta={
            "family": family.label(),
            "reliable": False,
            "reason": f"regularized deconvolution, spectral gain capped at {cutoff:g}",
            "cutoff": cutoff,
            "retained_band": retained,
            "band_error": band_error,
            "band_limited": True,
        },
    )
