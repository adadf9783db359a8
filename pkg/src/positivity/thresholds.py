from collections.abc import Callable

from scipy import optimize

from src.core.config import settings
from src.core.covariance import QUARTER
from src.core.errors import DomainError
from src.core.log import get_logger
from src.core.params import SystemParams, cw_of_t
from src.states.pointer import PointerFamily, c_quarter

logger = get_logger(__name__)

MAX_DOUBLINGS = 64


def wigner_positivity_time(params: SystemParams) -> float:
    """3^{1/4} t0, where |C_W(t)| = D^2 t^4 / 12 m^2 reaches 1/4."""
    return 3.0 ** 0.25 * params.t0


def factorization_gap(params: SystemParams, family: PointerFamily, t: float) -> float:
    """Smallest eigenvalue of C_W(t) - C_1/4; non-decreasing in t."""
    return (cw_of_t(params, t) - c_quarter(family)).min_eigenvalue()


def positivity_residual(params: SystemParams, family: PointerFamily, t: float) -> float:
    """|C_W(t) - C_1/4| - 1/4."""
    return (cw_of_t(params, t) - c_quarter(family)).det - QUARTER


def minimum_admissible_time(
    params: SystemParams,
    family: PointerFamily,
    *,
    xtol: float | None = None,
) -> float:
    """Earliest t at which C_W(t) - C_1/4 is positive semidefinite.

    The returned time is never below the true onset, so the forward P kernel
    at that time passes the PSD check.
    """
    _require_matching(params, family)
    xtol = (settings.root_xtol if xtol is None else xtol) * params.t0

    def gap(t: float) -> float:
        return factorization_gap(params, family, t)

    hi = _bracket_above(gap, params.t0)
    root = optimize.bisect(gap, 0.0, hi, xtol=xtol)
    for candidate in (root, root + xtol, root + 2.0 * xtol):
        if (cw_of_t(params, candidate) - c_quarter(family)).is_psd(settings.psd_tol):
            logger.debug("[roots] psd onset t=%.12g family=%s", candidate, family.label())
            return candidate
    return hi


def p_positivity_time(
    params: SystemParams,
    family: PointerFamily,
    *,
    xtol: float | None = None,
) -> float:
    """Smallest t with C_W(t) - C_1/4 >= 0 and |C_W(t) - C_1/4| = 1/4.

    Past the PSD onset the determinant grows monotonically, so bisection
    between the onset and a doubling bracket finds the unique crossing.
    """
    onset = minimum_admissible_time(params, family, xtol=xtol)
    xtol = (settings.root_xtol if xtol is None else xtol) * params.t0

    def residual(t: float) -> float:
        return positivity_residual(params, family, t)

    hi = _bracket_above(residual, max(10.0 * params.t0, onset))
    root = optimize.bisect(residual, onset, hi, xtol=xtol)
    logger.info(
        "[roots] p threshold t=%.10g t_over_t0=%.10g residual=%.3e family=%s",
        root,
        root / params.t0,
        residual(root),
        family.label(),
    )
    return root


def _bracket_above(f: Callable[[float], float], start: float) -> float:
    hi = start
    for _ in range(MAX_DOUBLINGS):
        if f(hi) >= 0.0:
            return hi
        hi *= 2.0
    raise DomainError(f"no sign change found below t={hi:.6g}")


def _require_matching(params: SystemParams, family: PointerFamily) -> None:
    if family.params != params:
        raise DomainError("pointer family was built for different system parameters")
