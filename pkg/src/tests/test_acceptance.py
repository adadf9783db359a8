"""Full-size runs on 512-point grids; skip them with ``pytest -m "not slow"``."""

import json
from pathlib import Path

import pytest

from src.core.grid import GridField, QGrid
from src.core.params import SystemParams, make_params
from src.evolution.fokker_planck import fd_fokker_planck
from src.evolution.propagators import consistency_p_vs_w, evolve_wigner
from src.main import main
from src.positivity.negativity import negativity
from src.positivity.thresholds import wigner_positivity_time
from src.quasiprob.reconstruct import reconstruct_density
from src.quasiprob.transforms import p_from_w, q_direct, q_from_w
from src.states.builders import cat_state, fock_density, vacuum_density
from src.states.density import DensityMatrix, trace_distance
from src.states.pointer import PointerFamily, robust_alpha
from src.states.wigner import density_from_wigner, phase_grid_for, wigner_from_density

pytestmark = pytest.mark.slow

STATES = ["vacuum", "fock1", "cat"]

LateCat = tuple[PointerFamily, SystemParams, DensityMatrix]


def _density(name: str, family: PointerFamily, q_grid: QGrid) -> DensityMatrix:
    if name == "vacuum":
        return vacuum_density(q_grid)
    if name == "fock1":
        return fock_density(1, q_grid)
    return cat_state(6.0, family, q_grid)


def _wigner(rho: DensityMatrix, p_extent: float, n_p: int = 512) -> GridField:
    return wigner_from_density(rho, phase_grid_for(rho.q_grid, p_extent, n_p=n_p))


@pytest.fixture(scope="module")
def late_cat() -> LateCat:
    params = make_params(1.0, 1.0)
    family = robust_alpha(params)
    return family, params, cat_state(6.0, family, QGrid.centered(1024, 40.0))


def test_cat_wigner_turns_positive(robust: PointerFamily, params: SystemParams) -> None:
    w0 = _wigner(cat_state(6.0, robust, QGrid.centered(512, 24.0)), 16.0)
    assert not negativity(w0).certified_positive
    assert negativity(w0).min_value < -0.1
    late = evolve_wigner(w0, params, 1.33 * params.t0)
    assert 1.33 * params.t0 > wigner_positivity_time(params)
    assert negativity(late).certified_positive


@pytest.mark.parametrize("state", STATES)
def test_fd_oracle_agrees(state: str, robust: PointerFamily, params: SystemParams) -> None:
    w0 = _wigner(_density(state, robust, QGrid.centered(512, 20.0)), 13.0)
    analytic = evolve_wigner(w0, params, 1.0)
    oracle = fd_fokker_planck(w0, params, 1.0)
    assert analytic.l1_distance(oracle) <= 1e-3


@pytest.mark.parametrize("state", STATES)
def test_q_routes_agree(state: str, robust: PointerFamily) -> None:
    rho = _density(state, robust, QGrid.centered(512, 16.0))
    grid = phase_grid_for(rho.q_grid, 16.0, n_p=512)
    smoothed = q_from_w(wigner_from_density(rho, grid), robust)
    direct = q_direct(rho, robust, grid)
    assert direct.sup_distance(smoothed) <= 1e-6
    assert smoothed.values.min() >= -1e-8 * smoothed.max_abs()


def test_cat_p_function_positive_past_threshold(
    robust: PointerFamily, params: SystemParams
) -> None:
    w0 = _wigner(cat_state(6.0, robust, QGrid.centered(512, 32.0)), 16.0)
    p = p_from_w(w0, robust, params, 2.0)
    assert negativity(p).certified_positive


def test_reconstruction_from_p(late_cat: LateCat) -> None:
    family, params, rho0 = late_cat
    w0 = _wigner(rho0, 20.0, n_p=1024)
    p = p_from_w(w0, family, params, 2.5)
    rho_t = density_from_wigner(evolve_wigner(w0, params, 2.5), rho0.q_grid)
    assert trace_distance(reconstruct_density(p, family, rho0.q_grid), rho_t) <= 1e-3


def test_density_round_trip_with_coarse_momentum(late_cat: LateCat) -> None:
    _, _, rho0 = late_cat
    # pi/dp covers the coherences of the cat but not the whole q range
    rho = density_from_wigner(_wigner(rho0, 20.0), rho0.q_grid)
    assert trace_distance(rho, rho0) <= 1e-8
    assert rho.is_psd()


def test_p_and_w_flows_agree(late_cat: LateCat) -> None:
    family, params, rho0 = late_cat
    grid = phase_grid_for(rho0.q_grid, 20.0, n_p=512)
    assert consistency_p_vs_w(rho0, family, params, 2.5, grid=grid) <= 1e-6


def test_certify_w_command_on_cat(tmp_path: Path) -> None:
    assert main(["certify-w", "--state", "cat", "--sep", "6", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "certify_w.json").read_text(encoding="utf-8"))
    assert report["bound_respected"] is True
    assert report["empirical_crossing"] <= 3.0 ** 0.25 + 0.01


def test_certify_p_command_on_cat(tmp_path: Path) -> None:
    assert main(["certify-p", "--state", "cat", "--sep", "6", "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "certify_p.json").read_text(encoding="utf-8"))
    assert report["bound_respected"] is True
    assert 1.96 <= report["thresholds"]["p_function"] <= 1.98
