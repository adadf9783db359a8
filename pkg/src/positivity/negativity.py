import numpy as np

from src.core.config import settings
from src.core.covariance import CorrelationMatrix
from src.core.grid import GridField
from src.core.kernels import convolve
from src.schemas.reports import NegativityReport


def grid_epsilon(f: GridField, rel_tol: float | None = None) -> float:
    rel_tol = settings.positivity_rel_tol if rel_tol is None else rel_tol
    return rel_tol * f.max_abs()


def negativity(f: GridField, *, rel_tol: float | None = None) -> NegativityReport:
    flat = int(np.argmin(f.values))
    i, j = np.unravel_index(flat, f.grid.shape)
    min_value = float(f.values[i, j])
    epsilon = grid_epsilon(f, rel_tol)
    negative_volume = float(-np.minimum(f.values, 0.0).sum() * f.grid.cell)
    return NegativityReport(
        min_value=min_value,
        min_location=(float(f.grid.x[i]), float(f.grid.p[j])),
        negative_volume=negative_volume,
        epsilon=epsilon,
        certified_positive=min_value >= -epsilon,
    )


def coarse_grain_positivity(
    w: GridField, c: CorrelationMatrix, *, rel_tol: float | None = None
) -> NegativityReport:
    """Negativity of g(.; C) * W; a positive result is guaranteed when |C| >= 1/4."""
    return negativity(convolve(w, c), rel_tol=rel_tol)
