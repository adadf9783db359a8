from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy import optimize

from src.core.config import settings
from src.core.grid import GridField
from src.core.log import get_logger
from src.core.params import SystemParams, cw_of_t
from src.evolution.diffusion import diffusion_matrix
from src.evolution.propagators import evolve_wigner
from src.positivity.negativity import grid_epsilon, negativity
from src.positivity.thresholds import (
    minimum_admissible_time,
    p_positivity_time,
    wigner_positivity_time,
)
from src.quasiprob.transforms import p_from_w
from src.schemas.reports import FamilyInfo, ProbeRecord, TheoremReport, Thresholds
from src.states.pointer import PointerFamily, c_quarter

logger = get_logger(__name__)

CROSSING_TOL = 0.01
CROSSING_XTOL = 1e-3
UNAVAILABLE = "forward route unavailable"


def probe_schedule(
    params: SystemParams,
    *,
    count: int | None = None,
    t_min: float | None = None,
    t_max: float | None = None,
) -> np.ndarray:
    """Log-spaced probe times, in units of t0 for the bounds."""
    count = settings.probe_count if count is None else count
    t_min = settings.probe_t_min if t_min is None else t_min
    t_max = settings.probe_t_max if t_max is None else t_max
    return np.geomspace(t_min, t_max, count) * params.t0


def family_info(family: PointerFamily) -> FamilyInfo:
    quarter = c_quarter(family)
    return FamilyInfo(
        alpha_re=family.alpha_re,
        alpha_im=family.alpha_im,
        c_quarter=(quarter.cxx, quarter.cxp, quarter.cpp),
        admissible=diffusion_matrix(family).admissible,
    )


def certify_theorem_w(
    w0: GridField,
    params: SystemParams,
    probes: Sequence[float] | None = None,
    *,
    state: str = "custom",
) -> TheoremReport:
    """Check that W(t) is certified positive at every probe past 3^{1/4} t0."""
    times = _sorted_probes(params, probes)
    threshold = wigner_positivity_time(params)

    def margin(t: float) -> float:
        w = evolve_wigner(w0, params, t)
        return float(w.values.min()) + grid_epsilon(w)

    def evaluate(t: float) -> ProbeRecord:
        report = negativity(evolve_wigner(w0, params, t))
        return ProbeRecord(
            t=t,
            min_value=report.min_value,
            negative_volume=report.negative_volume,
            certified=report.certified_positive,
        )

    records = _run_probes(evaluate, times)
    crossing = _empirical_crossing(records, margin, params)
    thresholds = Thresholds(wigner=threshold)
    return _report("W", state, None, params, thresholds, threshold, crossing, records)


def certify_theorem_p(
    w0: GridField,
    params: SystemParams,
    family: PointerFamily,
    probes: Sequence[float] | None = None,
    *,
    state: str = "custom",
) -> TheoremReport:
    """Check the forward-route P(t) past the determinant threshold.

    Probes before C_W(t) - C_1/4 becomes positive semidefinite have no
    forward P and are recorded as unavailable.
    """
    times = _sorted_probes(params, probes)
    threshold = p_positivity_time(params, family)
    onset = minimum_admissible_time(params, family)
    quarter = c_quarter(family)

    def admissible(t: float) -> bool:
        return (cw_of_t(params, t) - quarter).is_psd(settings.psd_tol)

    def margin(t: float) -> float:
        p = p_from_w(w0, family, params, t)
        return float(p.values.min()) + grid_epsilon(p)

    def evaluate(t: float) -> ProbeRecord:
        if not admissible(t):
            return ProbeRecord(
                t=t, min_value=None, negative_volume=None, certified=None, status=UNAVAILABLE
            )
        report = negativity(p_from_w(w0, family, params, t))
        return ProbeRecord(
            t=t,
            min_value=report.min_value,
            negative_volume=report.negative_volume,
            certified=report.certified_positive,
        )

    records = _run_probes(evaluate, times)
    crossing = _empirical_crossing(records, margin, params)
    thresholds = Thresholds(
        wigner=wigner_positivity_time(params), p_function=threshold, factorization=onset
    )
    info = family_info(family)
    return _report("P", state, info, params, thresholds, threshold, crossing, records)


def _sorted_probes(params: SystemParams, probes: Sequence[float] | None) -> list[float]:
    times = probe_schedule(params) if probes is None else np.asarray(probes, dtype=float)
    return sorted(float(t) for t in times)


def _run_probes(evaluate: Callable[[float], ProbeRecord], times: list[float]) -> list[ProbeRecord]:
    # executor.map keeps the probe order
    with ThreadPoolExecutor(max_workers=settings.worker_count) as executor:
        return list(executor.map(evaluate, times))


def _empirical_crossing(
    records: list[ProbeRecord], margin: Callable[[float], float], params: SystemParams
) -> float | None:
    """Time after which every probe is certified, refined between the bracketing probes.

    None when no sign change was observed: certified at every available
    probe, or never certified at all.
    """
    available = [record for record in records if record.certified is not None]
    failing = [index for index, record in enumerate(available) if not record.certified]
    if not failing or failing[-1] == len(available) - 1:
        return None
    lo, hi = available[failing[-1]].t, available[failing[-1] + 1].t
    return float(optimize.bisect(margin, lo, hi, xtol=CROSSING_XTOL * params.t0))


def _report(
    theorem: str,
    state: str,
    family: FamilyInfo | None,
    params: SystemParams,
    thresholds: Thresholds,
    threshold: float,
    crossing: float | None,
    records: list[ProbeRecord],
) -> TheoremReport:
    late_ok = all(record.certified for record in records if record.t >= threshold)
    crossing_ok = crossing is None or crossing <= threshold + CROSSING_TOL * params.t0
    respected = late_ok and crossing_ok
    logger.info(
        "[certify] theorem=%s state=%s threshold=%.6g crossing=%s probes=%d respected=%s",
        theorem,
        state,
        threshold,
        "none" if crossing is None else f"{crossing:.6g}",
        len(records),
        respected,
    )
    return TheoremReport(
        theorem=theorem,
        state=state,
        family=family,
        params={"m": params.m, "D": params.D},
        thresholds=thresholds,
        empirical_crossing=crossing,
        bound_respected=respected,
        probes=records,
    )
