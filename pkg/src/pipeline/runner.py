import itertools
import json
import math
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from src.core.config import settings
from src.core.covariance import CorrelationMatrix
from src.core.errors import ContractViolation, PhaseposError
from src.core.export import config_hash, write_field_csv, write_sidecar, write_table
from src.core.grid import GridField, QGrid
from src.core.kernels import coverage_bounds, support_sigmas
from src.core.log import configure_logging, get_logger
from src.core.params import SystemParams, Units, cw_of_t, make_params, nondimensionalize
from src.evolution.diffusion import diffusion_matrix, pointer_diffusion_relation
from src.evolution.fokker_planck import fd_fokker_planck
from src.evolution.propagators import evolve_wigner
from src.evolution.trace import evolution_trace, write_trace_csv
from src.pipeline.types import PreparedState, SweepPoint, SweepRow
from src.positivity.certify import (
    certify_theorem_p,
    certify_theorem_w,
    family_info,
    probe_schedule,
)
from src.positivity.thresholds import (
    minimum_admissible_time,
    p_positivity_time,
    wigner_positivity_time,
)
from src.quasiprob.transforms import p_deconvolve, p_from_w, q_from_w
from src.schemas.artifacts import FieldSidecar, Manifest, ManifestEntry
from src.schemas.config import RunConfig
from src.schemas.reports import TheoremReport
from src.states.builders import cat_state, fock_density, gaussian_density, vacuum_density
from src.states.density import DensityMatrix
from src.states.pointer import PointerFamily, c_quarter, make_family, robust_alpha
from src.states.wigner import phase_grid_for, wigner_from_density

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONTRACT = 3

ORACLE_L1_LIMIT = 1e-3
GRID_MARGIN = 1.05
ALIAS_MARGIN = 0.9
TRACE_POINTS = 17


@dataclass(slots=True)
class RunOutputs:
    out_dir: Path
    digest: str
    params: dict[str, float] = field(default_factory=dict)
    files: list[ManifestEntry] = field(default_factory=list)

    def add_field(self, f: GridField, name: str) -> None:
        path, sidecar = write_field_csv(
            f, self.out_dir / f"{name}.csv", params=self.params, config_digest=self.digest
        )
        self.files.append(ManifestEntry(path=path.name, sidecar=sidecar.name, kind=f.kind.value))

    def add_table(self, path: Path, kind: str) -> None:
        sidecar = write_sidecar(
            path, FieldSidecar(kind=kind, params=self.params, config_hash=self.digest)
        )
        self.files.append(ManifestEntry(path=path.name, sidecar=sidecar.name, kind=kind))

    def add_report(self, name: str, payload: dict) -> Path:
        path = self.out_dir / f"{name}.json"
        path.parent.mkdir(parents=True, exist_ok=True)
        document = {"config_hash": self.digest, **payload}
        path.write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        self.files.append(ManifestEntry(path=path.name, sidecar=None, kind="report"))
        return path


def resolve_family(config: RunConfig, params: SystemParams) -> PointerFamily:
    """Robust family unless alpha is given (in units of 1/sigma0^2)."""
    if config.alpha_re is None:
        return robust_alpha(params)
    scale = 1.0 / (params.sigma0 * params.sigma0)
    return make_family(complex(config.alpha_re, config.alpha_im or 0.0) * scale, params)


def build_density(
    name: str, config: RunConfig, family: PointerFamily, units: Units, q_grid: QGrid
) -> DensityMatrix:
    if name == "vacuum":
        return vacuum_density(q_grid, width=units.sigma0)
    if name == "fock1":
        return fock_density(1, q_grid, width=units.sigma0)
    if name == "gaussian":
        return gaussian_density(family, (0.0, 0.0), q_grid)
    return cat_state(config.sep * units.sigma0, family, q_grid)


def prepare_state(
    config: RunConfig, horizon: float, *, follow_up: CorrelationMatrix | None = None
) -> PreparedState:
    """Build rho and W0, widening the grid to hold the evolution up to ``horizon`` (units t0).

    ``follow_up`` is a further smoothing applied to the evolved field; the
    evolved support is then padded to its numerical tail before the
    follow-up spread. Extents given explicitly are kept as they are, and
    coverage problems surface as CoverageError from the numerical routines.
    """
    params = make_params(config.m, config.d)
    units = nondimensionalize(params)
    family = resolve_family(config, params)
    n = config.grid or settings.grid_n
    x_extent = (config.x_extent or settings.grid_x_extent) * units.sigma0
    p_extent = (config.p_extent or settings.grid_p_extent) * units.p_scale

    def build(n_x: int, x_ext: float, p_ext: float) -> tuple[DensityMatrix, GridField]:
        q_grid = QGrid.centered(n_x, x_ext)
        rho = build_density(config.state, config, family, units, q_grid)
        return rho, wigner_from_density(rho, phase_grid_for(q_grid, p_ext, n_p=n))

    rho, w0 = build(n, x_extent, p_extent)
    if config.x_extent is None or config.p_extent is None:
        t_phys = horizon * units.t0
        spread = cw_of_t(params, t_phys)
        n_sigma = None
        if follow_up is not None:
            spread = spread + follow_up
            n_sigma = settings.coverage_sigmas + support_sigmas()
        boxes = [
            coverage_bounds(w0),
            coverage_bounds(w0, spread, t_over_m=t_phys / params.m, n_sigma=n_sigma),
        ]
        x_need = GRID_MARGIN * max(max(abs(box[0]), abs(box[1])) for box in boxes if box)
        p_need = GRID_MARGIN * max(max(abs(box[2]), abs(box[3])) for box in boxes if box)
        new_x = x_extent if config.x_extent is not None else max(x_extent, x_need)
        new_p = p_extent if config.p_extent is not None else max(p_extent, p_need)
        if (new_x, new_p) != (x_extent, p_extent):
            n_x = max(n, _next_power_of_two(2.0 * new_x * new_p / (ALIAS_MARGIN * math.pi)))
            logger.info(
                "[runner] grid widened x_extent=%.4g p_extent=%.4g nx=%d np=%d horizon=%.4g",
                new_x,
                new_p,
                n_x,
                n,
                horizon,
            )
            rho, w0 = build(n_x, new_x, new_p)
    return PreparedState(
        name=config.state, params=params, units=units, family=family, rho=rho, w0=w0
    )


def _next_power_of_two(value: float) -> int:
    return 1 << max(3, math.ceil(math.log2(max(value, 1.0))))


def _probe_times(config: RunConfig, params: SystemParams) -> np.ndarray:
    return probe_schedule(
        params, count=config.probes, t_min=config.t_probe_min, t_max=config.t_probe_max
    )


def _probe_horizon(config: RunConfig) -> float:
    return config.t_probe_max or settings.probe_t_max


def run_evolve(config: RunConfig, outputs: RunOutputs) -> None:
    params = make_params(config.m, config.d)
    prepared = prepare_state(
        config, config.t, follow_up=c_quarter(resolve_family(config, params))
    )
    family = prepared.family
    t = config.t * params.t0
    outputs.params = {"m": params.m, "D": params.D}
    w_t = evolve_wigner(prepared.w0, params, t)
    outputs.add_table(prepared.rho.write_csv(outputs.out_dir / "rho_t0.csv"), "density")
    outputs.add_field(prepared.w0, "wigner_t0")
    outputs.add_field(w_t, "wigner_t")
    outputs.add_field(q_from_w(w_t, family), "q_t")
    if (cw_of_t(params, t) - c_quarter(family)).is_psd(settings.psd_tol):
        p_t = p_from_w(prepared.w0, family, params, t)
    else:
        p_t = p_deconvolve(w_t, family)
    outputs.add_field(p_t, "p_t")
    rows = evolution_trace(prepared.w0, params, np.linspace(0.0, t, TRACE_POINTS))
    outputs.add_table(write_trace_csv(rows, outputs.out_dir / "trace.csv"), "trace")
    print(f"evolved state={prepared.name} t/t0={config.t:.6g} min_w={w_t.values.min():.6e}")
    print(f"p_function reliable={p_t.meta.get('reliable', True)} min_p={p_t.values.min():.6e}")


def _certify_outputs(report: TheoremReport, outputs: RunOutputs, name: str) -> None:
    outputs.add_report(name, report.model_dump(mode="json"))
    rows = [record for record in report.probes if record.min_value is not None]
    path = write_table(
        outputs.out_dir / f"{name}_curve.csv",
        ["t", "min_value", "negative_volume"],
        [
            np.array([record.t for record in rows]),
            np.array([record.min_value for record in rows]),
            np.array([record.negative_volume for record in rows]),
        ],
    )
    outputs.add_table(path, "curve")
    print(report.model_dump_json(indent=2))
    if not report.bound_respected:
        thresholds = report.thresholds
        threshold = thresholds.p_function if report.theorem == "P" else thresholds.wigner
        crossing = report.empirical_crossing
        raise ContractViolation(
            f"theorem {report.theorem} bound not respected",
            measured=crossing if crossing is not None else math.inf,
            limit=threshold or math.nan,
        )


def run_certify_w(config: RunConfig, outputs: RunOutputs) -> None:
    prepared = prepare_state(config, _probe_horizon(config))
    params = prepared.params
    outputs.params = {"m": params.m, "D": params.D}
    report = certify_theorem_w(
        prepared.w0, params, _probe_times(config, params), state=prepared.name
    )
    _certify_outputs(report, outputs, "certify_w")


def run_certify_p(config: RunConfig, outputs: RunOutputs) -> None:
    prepared = prepare_state(config, _probe_horizon(config))
    params = prepared.params
    outputs.params = {"m": params.m, "D": params.D}
    report = certify_theorem_p(
        prepared.w0, params, prepared.family, _probe_times(config, params), state=prepared.name
    )
    _certify_outputs(report, outputs, "certify_p")


def run_decoherence_times(config: RunConfig, outputs: RunOutputs) -> None:
    params = make_params(config.m, config.d)
    family = resolve_family(config, params)
    outputs.params = {"m": params.m, "D": params.D}
    t_w = wigner_positivity_time(params)
    t_psd = minimum_admissible_time(params, family)
    t_p = p_positivity_time(params, family)
    info = family_info(family)
    relation = pointer_diffusion_relation(params, family)
    outputs.add_report(
        "decoherence_times",
        {
            "params": {"m": params.m, "D": params.D, "t0": params.t0, "sigma0": params.sigma0},
            "family": info.model_dump(mode="json"),
            "wigner_positivity_time": t_w,
            "factorization_time": t_psd,
            "p_positivity_time": t_p,
            "relation": relation.model_dump(mode="json"),
        },
    )
    print(f"wigner_positivity_time t/t0={t_w / params.t0:.6f} t={t_w:.10g}")
    print(f"factorization_time t/t0={t_psd / params.t0:.6f} t={t_psd:.10g}")
    print(f"p_positivity_time t/t0={t_p / params.t0:.6f} t={t_p:.10g}")
    print(f"family {info.model_dump_json()}")


def sweep_point(point: SweepPoint) -> SweepRow:
    params = make_params(point.m, point.d)
    if point.alpha_re is None:
        family = robust_alpha(params)
    else:
        scale = 1.0 / (params.sigma0 * params.sigma0)
        family = make_family(complex(point.alpha_re, point.alpha_im or 0.0) * scale, params)
    return SweepRow(
        index=point.index,
        m=params.m,
        d=params.D,
        alpha_re=family.alpha_re,
        alpha_im=family.alpha_im,
        admissible=diffusion_matrix(family).admissible,
        t_wigner=wigner_positivity_time(params),
        t_factorization=minimum_admissible_time(params, family),
        t_p=p_positivity_time(params, family),
    )


def run_sweep(config: RunConfig, outputs: RunOutputs) -> None:
    alphas: list[tuple[float, float] | None] = list(config.alphas or [None])
    points = [
        SweepPoint(
            index=index,
            m=m,
            d=d,
            alpha_re=None if alpha is None else alpha[0],
            alpha_im=None if alpha is None else alpha[1],
        )
        for index, (m, d, alpha) in enumerate(
            itertools.product(config.m_values, config.d_values, alphas)
        )
    ]
    logger.info("[runner] sweep points=%d workers=%d", len(points), settings.worker_count)
    with ProcessPoolExecutor(max_workers=settings.worker_count) as pool:
        rows = list(pool.map(sweep_point, points))
    header = list(asdict(rows[0]).keys())
    columns = [np.array([float(getattr(row, name)) for row in rows]) for name in header]
    outputs.add_table(write_table(outputs.out_dir / "sweep.csv", header, columns), "sweep")
    for row in rows:
        print(json.dumps(asdict(row), sort_keys=True))


def run_oracle_compare(config: RunConfig, outputs: RunOutputs) -> None:
    prepared = prepare_state(config, config.t)
    params = prepared.params
    t = config.t * params.t0
    outputs.params = {"m": params.m, "D": params.D}
    analytic = evolve_wigner(prepared.w0, params, t)
    oracle = fd_fokker_planck(prepared.w0, params, t)
    outputs.add_field(analytic, "wigner_analytic")
    outputs.add_field(oracle, "wigner_fd")
    distance = analytic.l1_distance(oracle)
    outputs.add_report(
        "oracle_compare", {"t": t, "l1_distance": distance, "limit": ORACLE_L1_LIMIT}
    )
    print(f"oracle l1_distance={distance:.6e} limit={ORACLE_L1_LIMIT:g}")
    if distance > ORACLE_L1_LIMIT:
        raise ContractViolation(
            "finite-difference oracle disagrees", measured=distance, limit=ORACLE_L1_LIMIT
        )


COMMANDS: dict[str, Callable[[RunConfig, RunOutputs], None]] = {
    "evolve": run_evolve,
    "certify-w": run_certify_w,
    "certify-p": run_certify_p,
    "decoherence-times": run_decoherence_times,
    "sweep": run_sweep,
    "oracle-compare": run_oracle_compare,
}


def run(config: RunConfig) -> int:
    """Execute one subcommand, write manifest.json and return the exit code."""
    configure_logging()
    out_dir = Path(config.out or settings.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = RunOutputs(out_dir=out_dir, digest=config_hash(config.model_dump(mode="json")))
    logger.info(
        "[runner] command=%s config_hash=%s out=%s", config.command, outputs.digest, out_dir
    )
    try:
        COMMANDS[config.command](config, outputs)
        exit_code = EXIT_OK
    except ContractViolation as exc:
        logger.error("[runner] contract violation: %s", exc)
        exit_code = EXIT_CONTRACT
    except PhaseposError as exc:
        logger.error("[runner] invalid input: %s", exc)
        exit_code = EXIT_VALIDATION
    manifest = Manifest(
        command=config.command, config_hash=outputs.digest, exit_code=exit_code, files=outputs.files
    )
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    logger.info(
        "[runner] done command=%s exit=%d files=%d", config.command, exit_code, len(outputs.files)
    )
    return exit_code
