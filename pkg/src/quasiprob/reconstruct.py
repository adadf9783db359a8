import numpy as np

from src.core.config import settings
from src.core.errors import ContractViolation, CoverageError, DomainError
from src.core.grid import GridField, QGrid
from src.core.log import get_logger
from src.states.density import DensityMatrix
from src.states.pointer import PointerFamily

logger = get_logger(__name__)


def reconstruct_density(p: GridField, family: PointerFamily, q_grid: QGrid) -> DensityMatrix:
    """rho = int P(Gamma) |Gamma><Gamma| dGamma as a quadrature mixture of pointer projectors.

    For each x row the momentum sum depends only on q - q', so it is
    tabulated once per row on the offset lattice and gathered into a
    Toeplitz pattern.
    """
    total = p.integral()
    if abs(total - 1.0) > settings.normalization_tol:
        raise DomainError(f"P field integrates to {total:.10f}, expected 1")

    grid = p.grid
    rows = np.flatnonzero(np.abs(p.values).max(axis=1) > settings.support_tol * p.max_abs())
    reach = settings.coverage_sigmas * family.position_std
    x_rows = grid.x[rows]
    if x_rows.min() - reach < q_grid.q_min or x_rows.max() + reach > q_grid.q_max:
        raise CoverageError(
            "position grid does not hold the pointer states under the P support",
            required={"q_min": float(x_rows.min() - reach), "q_max": float(x_rows.max() + reach)},
        )

    q = q_grid.q
    n = q_grid.n
    offsets = np.arange(-(n - 1), n) * q_grid.dq
    momentum_sums = p.values[rows] @ np.exp(1j * np.outer(grid.p, offsets))
    toeplitz = np.arange(n)[:, None] - np.arange(n)[None, :] + n - 1

    normal = np.sqrt(family.alpha_re / (2.0 * np.pi))
    entries = np.zeros((n, n), dtype=complex)
    for x0, sums in zip(x_rows, momentum_sums):
        envelope = np.exp(-family.alpha * (q - x0) ** 2 / 4.0)
        entries += np.outer(envelope, envelope.conj()) * sums[toeplitz]
    entries *= normal * grid.cell
    # restore Hermiticity lost to rounding in the accumulation
    entries = 0.5 * (entries + entries.conj().T)

    trace = float(np.real(np.diag(entries)).sum() * q_grid.dq)
    logger.debug("[quasi] reconstruct rows=%d n=%d trace=%.12f", len(rows), n, trace)
    if abs(trace - 1.0) > settings.normalization_tol:
        raise ContractViolation(
            f"reconstructed trace {trace:.10f} differs from 1",
            measured=abs(trace - 1.0),
            limit=settings.normalization_tol,
        )
    # rounding inside the tolerance is absorbed
    return DensityMatrix(q_grid=q_grid, entries=entries / trace).validate()
