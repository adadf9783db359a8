import math

from src.core.config import settings
from src.core.errors import DomainError, ThresholdError
from src.core.grid import FieldKind, GridField, PhaseGrid
from src.core.kernels import convolve, require_coverage, shear
from src.core.log import get_logger
from src.core.params import SystemParams, cw_of_t
from src.evolution.diffusion import diffusion_matrix
from src.positivity.thresholds import minimum_admissible_time
from src.quasiprob.transforms import p_from_w
from src.states.density import DensityMatrix
from src.states.pointer import PointerFamily, c_quarter
from src.states.wigner import phase_grid_for, wigner_from_density

logger = get_logger(__name__)


def _require_time(t: float) -> None:
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"time must be non-negative, got t={t!r}")


def evolve_wigner(w0: GridField, params: SystemParams, t: float) -> GridField:
    """W(t) = g(.; C_W(t)) * W0(x - p t/m, p): free streaming then Gaussian coarse-graining."""
    _require_time(t)
    if t == 0.0:
        return w0
    c = cw_of_t(params, t)
    t_over_m = t / params.m
    require_coverage(w0, c, t_over_m=t_over_m, label="Wigner propagator")
    sheared = shear(w0, t_over_m, check_coverage=False)
    w = convolve(sheared, c, check_coverage=False)
    logger.debug("[evolve] wigner t=%.6g norm=%.12f", t, w.integral())
    return w.with_values(w.values, meta={**w0.meta, "t": w0.meta.get("t", 0.0) + t})


def evolve_p_function(
    f0: GridField, family: PointerFamily, params: SystemParams, t: float
) -> GridField:
    """f(t) = g(.; t D(t)) * f0(x - p t/m, p), the pointer-state Fokker-Planck propagator."""
    _require_time(t)
    if family.params != params:
        raise DomainError("pointer family was built for different system parameters")
    diffusion = diffusion_matrix(family)
    if not diffusion.admissible:
        raise DomainError(
            f"diffusion matrix of family {family.label()} is indefinite "
            f"(eigenvalues {diffusion.eigvals()}); the P flow has no Fokker-Planck reading"
        )
    if t == 0.0:
        return f0
    kernel = diffusion.kernel(t)
    t_over_m = t / params.m
    require_coverage(f0, kernel, t_over_m=t_over_m, label="P propagator")
    sheared = shear(f0, t_over_m, check_coverage=False)
    f = convolve(sheared, kernel, check_coverage=False)
    logger.debug("[evolve] p_function t=%.6g norm=%.12f", t, f.integral())
    return f.with_values(f.values, meta={**f0.meta, "t": f0.meta.get("t", 0.0) + t})


def consistency_p_vs_w(
    rho0: DensityMatrix,
    family: PointerFamily,
    params: SystemParams,
    t: float,
    *,
    grid: PhaseGrid | None = None,
) -> float:
    """sup |W(t) - g(C_1/4) * P(t)| with P(t) carried by the P propagator.

    P starts at the earliest admissible time via the forward route and is
    then evolved with evolve_p_function for the remaining time.
    """
    _require_time(t)
    t_min = minimum_admissible_time(params, family)
    if not (cw_of_t(params, t) - c_quarter(family)).is_psd(settings.psd_tol):
        raise ThresholdError(f"factorization does not hold yet at t={t:.6g}", t_min=t_min)
    w0 = wigner_from_density(rho0, grid or phase_grid_for(rho0.q_grid))
    direct = evolve_wigner(w0, params, t)

    start = min(t_min, t)
    p_start = p_from_w(w0, family, params, start)
    p_t = evolve_p_function(p_start, family, params, t - start)
    via_p = convolve(p_t, c_quarter(family), kind=FieldKind.wigner)
    distance = direct.sup_distance(via_p)
    logger.info(
        "[evolve] p_vs_w t=%.6g t_min=%.6g sup_distance=%.3e family=%s",
        t,
        t_min,
        distance,
        family.label(),
    )
    return distance
