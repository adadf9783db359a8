import numpy as np
import pytest

from src.core.covariance import CorrelationMatrix
from src.core.errors import ContractViolation, CoverageError, DomainError, ThresholdError
from src.core.grid import FieldKind, GridField, PhaseGrid, QGrid
from src.core.kernels import convolve
from src.core.params import SystemParams
from src.evolution.propagators import evolve_wigner
from src.positivity.thresholds import minimum_admissible_time
from src.quasiprob.fourier import inverse_symplectic_fourier, symplectic_fourier
from src.quasiprob.reconstruct import reconstruct_density
from src.quasiprob.transforms import p_deconvolve, p_from_w, q_direct, q_from_w
from src.states.builders import cat_state, fock_density, gaussian_density, vacuum_density
from src.states.density import trace_distance
from src.states.pointer import PointerFamily, c_quarter, overlap_sq
from src.states.wigner import density_from_wigner, phase_grid_for, wigner_from_density
from src.tests.fields import VACUUM, gaussian_field

Q_GRID = QGrid.centered(256, 16.0)
GRID = phase_grid_for(Q_GRID, 16.0)


def test_fourier_of_gaussian_is_gaussian_symbol() -> None:
    grid = PhaseGrid.symmetric(128, 12.0, 12.0)
    c = CorrelationMatrix(1.0, 0.3, 0.8)
    spectrum = symplectic_fourier(gaussian_field(grid, c, kind=FieldKind.generic))
    assert np.allclose(spectrum.values, spectrum.gaussian_symbol(c), atol=1e-10, rtol=0)


def test_fourier_of_narrow_gaussian_is_flat_at_low_frequency() -> None:
    grid = PhaseGrid.symmetric(256, 8.0, 8.0)
    narrow = CorrelationMatrix.diag(0.01, 0.01)
    spectrum = symplectic_fourier(gaussian_field(grid, narrow, kind=FieldKind.generic))
    kx, kp = np.meshgrid(spectrum.kx, spectrum.kp, indexing="ij")
    low = kx * kx + kp * kp <= 9.0
    assert np.abs(spectrum.values[0, 0] - 1.0) <= 1e-10
    assert np.abs(spectrum.values[low]).min() >= 0.9


def test_inverse_fourier(robust: PointerFamily) -> None:
    w = wigner_from_density(cat_state(6.0, robust, Q_GRID), GRID)
    restored = inverse_symplectic_fourier(symplectic_fourier(w), kind=FieldKind.wigner)
    assert restored.sup_distance(w) <= 1e-10


def test_fourier_relations_on_cat(robust: PointerFamily, params: SystemParams) -> None:
    q_grid = QGrid.centered(512, 32.0)
    w0 = wigner_from_density(cat_state(6.0, robust, q_grid), phase_grid_for(q_grid, 16.0, n_p=256))
    w_tilde = symplectic_fourier(w0)
    symbol = w_tilde.gaussian_symbol(c_quarter(robust))
    q_tilde = symplectic_fourier(q_from_w(w0, robust))
    assert np.allclose(q_tilde.values, symbol * w_tilde.values, atol=1e-10, rtol=0)

    p_tilde = symplectic_fourier(p_from_w(w0, robust, params, 2.0))
    wt_tilde = symplectic_fourier(evolve_wigner(w0, params, 2.0))
    assert np.allclose(wt_tilde.values, symbol * p_tilde.values, atol=1e-8, rtol=0)


def test_q_of_vacuum(symmetric: PointerFamily) -> None:
    grid = PhaseGrid.symmetric(256, 12.0, 12.0)
    q = q_from_w(gaussian_field(grid, VACUUM), symmetric)
    assert q.kind == FieldKind.q
    assert q.sup_distance(gaussian_field(grid, VACUUM + VACUUM, kind=FieldKind.q)) <= 1e-8


def test_q_is_nonnegative(robust: PointerFamily) -> None:
    w = wigner_from_density(cat_state(6.0, robust, Q_GRID), GRID)
    assert w.values.min() < -0.1
    q = q_from_w(w, robust)
    assert abs(q.integral() - 1.0) <= 1e-8
    assert q.values.min() >= -1e-8 * q.max_abs()


@pytest.mark.parametrize("state", ["vacuum", "fock1", "cat"])
def test_q_direct_matches_convolution(state: str, robust: PointerFamily) -> None:
    rho = {
        "vacuum": vacuum_density(Q_GRID),
        "fock1": fock_density(1, Q_GRID),
        "cat": cat_state(6.0, robust, Q_GRID),
    }[state]
    direct = q_direct(rho, robust, GRID)
    smoothed = q_from_w(wigner_from_density(rho, GRID), robust)
    assert direct.sup_distance(smoothed) <= 1e-6


def test_q_direct_of_pointer_state(robust: PointerFamily) -> None:
    centre = (1.0, -0.5)
    q = q_direct(gaussian_density(robust, centre, Q_GRID), robust, GRID)
    i, j = GRID.index_of(3.0, 1.5)
    expected = overlap_sq(robust, (float(GRID.x[i]), float(GRID.p[j])), centre)
    assert q.values[i, j] == pytest.approx(expected, abs=1e-8)


def test_q_direct_aliasing(robust: PointerFamily) -> None:
    q_grid = QGrid.centered(64, 12.0)
    with pytest.raises(CoverageError):
        q_direct(vacuum_density(q_grid), robust, phase_grid_for(q_grid, 12.0))


def test_p_from_w_below_threshold(robust: PointerFamily) -> None:
    params = robust.params
    w0 = gaussian_field(PhaseGrid.symmetric(256, 24.0, 16.0), VACUUM)
    with pytest.raises(ThresholdError) as excinfo:
        p_from_w(w0, robust, params, 1.0)
    assert excinfo.value.t_min == pytest.approx(minimum_admissible_time(params, robust))


def test_p_from_w_at_onset(robust: PointerFamily) -> None:
    params = robust.params
    w0 = gaussian_field(PhaseGrid.symmetric(256, 24.0, 16.0), VACUUM)
    onset = minimum_admissible_time(params, robust)
    p = p_from_w(w0, robust, params, onset)
    assert p.kind == FieldKind.p
    assert p.meta["reliable"] is True
    assert abs(p.integral() - 1.0) <= 1e-10


def test_p_smooths_back_to_wigner(robust: PointerFamily, params: SystemParams) -> None:
    grid = PhaseGrid(256, 256, -24.0, 24.0, -16.0, 16.0)
    w0 = gaussian_field(grid, VACUUM)
    p = p_from_w(w0, robust, params, 2.0)
    smoothed = convolve(p, c_quarter(robust), kind=FieldKind.wigner)
    assert smoothed.sup_distance(evolve_wigner(w0, params, 2.0)) <= 1e-8
    assert p.values.min() >= -1e-8 * p.max_abs()


def test_deconvolution_of_broad_gaussian(symmetric: PointerFamily) -> None:
    grid = PhaseGrid.symmetric(256, 12.0, 12.0)
    w = gaussian_field(grid, CorrelationMatrix.diag(1.5, 1.5))
    p = p_deconvolve(w, symmetric)
    assert p.meta["reliable"] is False
    assert p.meta["reason"]
    assert 0.0 < p.meta["retained_band"] <= 1.0
    expected = gaussian_field(grid, CorrelationMatrix.diag(1.0, 1.0), kind=FieldKind.p)
    assert p.sup_distance(expected) <= 1e-4
    assert convolve(p, c_quarter(symmetric)).sup_distance(w) <= 1e-6


def test_deconvolution_of_vacuum_width_state(symmetric: PointerFamily) -> None:
    grid = PhaseGrid.symmetric(128, 8.0, 8.0)
    w = gaussian_field(grid, VACUUM)
    p = p_deconvolve(w, symmetric)
    # W already has the pointer width, so P collapses towards a point mass
    assert np.unravel_index(np.argmax(p.values), grid.shape) == grid.index_of(0.0, 0.0)
    assert p.values.max() > 10.0 * w.max_abs()
    assert 0.0 <= p.meta["band_error"] <= 1e-6
    assert p.meta["band_limited"] is True


def test_deconvolution_rejects_small_cutoff(symmetric: PointerFamily) -> None:
    grid = PhaseGrid.symmetric(64, 8.0, 8.0)
    with pytest.raises(DomainError):
        p_deconvolve(gaussian_field(grid, VACUUM), symmetric, cutoff=0.5)


def test_reconstruct_point_mass(robust: PointerFamily) -> None:
    grid = PhaseGrid.symmetric(128, 8.0, 8.0)
    centre = (0.5, -0.25)
    i, j = grid.index_of(*centre)
    values = np.zeros(grid.shape)
    values[i, j] = 1.0 / grid.cell
    p = GridField(grid=grid, values=values, kind=FieldKind.p)
    q_grid = QGrid.centered(128, 8.0)
    rho = reconstruct_density(p, robust, q_grid)
    assert trace_distance(rho, gaussian_density(robust, centre, q_grid)) <= 1e-8


def test_reconstruct_matches_wigner_route(robust: PointerFamily) -> None:
    grid = PhaseGrid.symmetric(256, 12.0, 12.0)
    p = gaussian_field(grid, CorrelationMatrix.diag(0.8, 0.8), kind=FieldKind.p)
    q_grid = grid.q_grid()
    rho = reconstruct_density(p, robust, q_grid)
    assert rho.min_eigenvalue() >= -1e-8
    w = convolve(p, c_quarter(robust), kind=FieldKind.wigner)
    assert trace_distance(rho, density_from_wigner(w, q_grid)) <= 1e-6


def test_reconstruct_rejects_unnormalized(robust: PointerFamily) -> None:
    grid = PhaseGrid.symmetric(64, 8.0, 8.0)
    half = gaussian_field(grid, VACUUM, kind=FieldKind.generic)
    half = half.with_values(0.5 * half.values)
    with pytest.raises(DomainError):
        reconstruct_density(half, robust, QGrid.centered(64, 8.0))


def test_reconstruct_coverage(robust: PointerFamily) -> None:
    grid = PhaseGrid.symmetric(128, 8.0, 8.0)
    p = gaussian_field(grid, VACUUM, mean=(3.0, 0.0), kind=FieldKind.p)
    with pytest.raises(CoverageError):
        reconstruct_density(p, robust, QGrid.centered(64, 4.0))


def test_reconstruct_exposes_quadrature_loss(robust: PointerFamily) -> None:
    grid = PhaseGrid.symmetric(128, 8.0, 8.0)
    i, j = grid.index_of(0.0, 0.0)
    values = np.zeros(grid.shape)
    values[i, j] = 1.0 / grid.cell
    p = GridField(grid=grid, values=values, kind=FieldKind.p)
    # dq = 2 under-samples the pointer envelope
    with pytest.raises(ContractViolation) as excinfo:
        reconstruct_density(p, robust, QGrid.centered(8, 8.0))
    assert excinfo.value.measured > 1e-3
    assert excinfo.value.limit == pytest.approx(1e-6)
