import math

import numpy as np
from scipy import fft

from src.core.config import settings
from src.core.errors import DomainError, StabilityError
from src.core.grid import GridField
from src.core.kernels import require_coverage
from src.core.log import get_logger
from src.core.params import SystemParams, cw_of_t

logger = get_logger(__name__)

STEP_MATCH_TOL = 1e-9
LOG_EVERY = 1000


def stability_bound(dp: float, D: float) -> float:
    """Largest stable step of forward Euler for (D/2) d^2/dp^2 with centred differences."""
    return dp * dp / D


def fd_fokker_planck(
    w0: GridField,
    params: SystemParams,
    t: float,
    dt: float | None = None,
    *,
    include_diffusion: bool = True,
) -> GridField:
    """Time-step dW/dt = -(p/m) dW/dx + (D/2) d^2W/dp^2.

    Strang splitting: the drift is an exact phase ramp on the x-transform,
    the diffusion is explicit centred differences in p. Both act column by
    column in the (kx, p) representation, so the field stays there until
    the last step. With ``include_diffusion=False`` only the drift runs,
    which is free streaming along x - p t/m.
    """
    if not math.isfinite(t) or t < 0.0:
        raise DomainError(f"time must be non-negative, got t={t!r}")
    grid = w0.grid
    bound = stability_bound(grid.dp, params.D)
    if dt is None:
        steps = max(1, math.ceil(t / (settings.fd_dt_factor * bound)))
        dt = t / steps
    else:
        if not dt > 0.0:
            raise DomainError(f"time step must be positive, got dt={dt!r}")
        steps = int(round(t / dt))
        if abs(steps * dt - t) > STEP_MATCH_TOL * max(t, 1.0):
            raise DomainError(f"t={t:.10g} is not an integer multiple of dt={dt:.10g}")
    if include_diffusion and dt > bound:
        raise StabilityError(f"explicit diffusion step dt={dt:.6g} is unstable", bound=bound)
    if t == 0.0 or steps == 0:
        return w0

    t_over_m = t / params.m
    c = cw_of_t(params, t) if include_diffusion else None
    require_coverage(w0, c, t_over_m=t_over_m, label="finite-difference evolution")

    kx = 2.0 * np.pi * fft.rfftfreq(grid.n_x, d=grid.dx)
    ramp = -1j * kx[:, None] * grid.p[None, :] / params.m
    half_drift = np.exp(ramp * (0.5 * dt))
    full_drift = np.exp(ramp * dt)
    nu = 0.5 * params.D * dt / (grid.dp * grid.dp)

    spectrum = fft.rfft(w0.values, axis=0, workers=settings.worker_count)
    spectrum *= half_drift
    for step in range(steps):
        if include_diffusion:
            neighbours = np.roll(spectrum, 1, axis=1) + np.roll(spectrum, -1, axis=1)
            spectrum += nu * (neighbours - 2.0 * spectrum)
        spectrum *= full_drift if step < steps - 1 else half_drift
        if (step + 1) % LOG_EVERY == 0:
            logger.debug("[fd] step=%d/%d", step + 1, steps)
    values = fft.irfft(spectrum, n=grid.n_x, axis=0, workers=settings.worker_count)
    logger.info(
        "[fd] t=%.6g steps=%d dt=%.6g diffusion=%s bound=%.6g",
        t,
        steps,
        dt,
        include_diffusion,
        bound,
    )
    return w0.with_values(values, meta={**w0.meta, "t": w0.meta.get("t", 0.0) + t, "dt": dt})
