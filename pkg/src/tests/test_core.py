import json
import math
from pathlib import Path

import numpy as np
import pytest

from src.core.covariance import CorrelationMatrix, det_condition
from src.core.errors import CoverageError, DomainError
from src.core.export import config_hash, read_field_csv, write_field_csv
from src.core.grid import FieldKind, GridField, PhaseGrid, QGrid, phase_moments
from src.core.kernels import convolve, gaussian_kernel, shear, support_sigmas
from src.core.params import cw_of_t, make_params, nondimensionalize
from src.tests.fields import VACUUM, gaussian_field


def test_cw_determinant_grows_as_fourth_power() -> None:
    params = make_params(2.0, 0.5)
    for t in (0.1, 1.0, 3.7):
        c = cw_of_t(params, t)
        expected = params.D ** 2 * t ** 4 / (12.0 * params.m ** 2)
        assert c.det == pytest.approx(expected, rel=1e-12)
        assert c.is_psd()


def test_cw_composes_along_the_flow() -> None:
    params = make_params(1.5, 0.7)
    t1, t2 = 0.8, 1.3
    s2 = np.array(params.shear_matrix(t2))
    composed = cw_of_t(params, t1).congruence(s2) + cw_of_t(params, t2)
    assert composed.max_abs_diff(cw_of_t(params, t1 + t2)) <= 1e-12


def test_cw_rejects_negative_time() -> None:
    with pytest.raises(DomainError):
        cw_of_t(make_params(1.0, 1.0), -0.1)


def test_det_condition_boundary() -> None:
    assert det_condition(CorrelationMatrix.diag(0.5, 0.5))
    assert det_condition(CorrelationMatrix(1.0, 0.5, 0.5))
    assert not det_condition(CorrelationMatrix.diag(0.49, 0.5))
    assert not det_condition(CorrelationMatrix(-1.0, 0.0, -1.0))


def test_make_params_rejects_non_positive() -> None:
    with pytest.raises(DomainError):
        make_params(0.0, 1.0)
    with pytest.raises(DomainError):
        make_params(1.0, float("nan"))


def test_nondimensionalize_scales() -> None:
    params = make_params(4.0, 1.0)
    units = nondimensionalize(params)
    assert units.t0 == pytest.approx(2.0)
    assert units.sigma0 == pytest.approx(4.0 ** -0.25)
    natural = units.to_natural(1.0, 2.0, 3.0)
    assert np.allclose(units.from_natural(*natural), (1.0, 2.0, 3.0))
    # C_W at t0 in natural units is the same for every (m, D)
    c = units.correlation_to_natural(cw_of_t(params, params.t0))
    reference = cw_of_t(make_params(1.0, 1.0), 1.0)
    assert c.max_abs_diff(reference) <= 1e-12


def test_phase_grid_rejects_non_power_of_two() -> None:
    with pytest.raises(DomainError):
        PhaseGrid(100, 128, -1.0, 1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        PhaseGrid(128, 128, 1.0, -1.0, -1.0, 1.0)


def test_normalized_field_rejects_bad_integral() -> None:
    grid = PhaseGrid.symmetric(64, 8.0, 8.0)
    with pytest.raises(DomainError):
        GridField(grid=grid, values=np.ones(grid.shape), kind=FieldKind.wigner)


def test_gaussian_kernel_is_normalized() -> None:
    grid = PhaseGrid.symmetric(128, 12.0, 12.0)
    kernel = gaussian_kernel(CorrelationMatrix(1.0, 0.3, 0.8), grid)
    assert abs(kernel.integral() - 1.0) <= 1e-10
    assert kernel.values.max() == pytest.approx(1.0 / math.sqrt(0.8 - 0.09), rel=1e-12)


def test_gaussian_kernel_coverage() -> None:
    grid = PhaseGrid.symmetric(64, 8.0, 8.0)
    with pytest.raises(CoverageError) as excinfo:
        gaussian_kernel(CorrelationMatrix.diag(4.0, 1.0), grid)
    assert excinfo.value.required["x_max"] == pytest.approx(12.0)


def test_phase_moments_recover_covariance() -> None:
    grid = PhaseGrid.symmetric(128, 12.0, 12.0)
    c = CorrelationMatrix(1.2, -0.4, 0.9)
    mean, cov = phase_moments(gaussian_field(grid, c, mean=(0.5, -1.0)))
    assert np.allclose(mean, (0.5, -1.0), atol=1e-9)
    assert cov.max_abs_diff(c) <= 1e-8


def test_convolution_semigroup() -> None:
    grid = PhaseGrid.symmetric(256, 16.0, 16.0)
    c1 = CorrelationMatrix.diag(1.0, 0.5)
    c2 = CorrelationMatrix(0.5, 0.2, 0.5)
    smoothed = convolve(gaussian_field(grid, c1, kind=FieldKind.generic), c2)
    expected = gaussian_field(grid, c1 + c2, kind=FieldKind.generic)
    assert smoothed.sup_distance(expected) <= 1e-10


def test_convolution_with_singular_matrix() -> None:
    grid = PhaseGrid.symmetric(256, 16.0, 16.0)
    line = CorrelationMatrix(1.0, 1.0, 1.0)
    smoothed = convolve(gaussian_field(grid, VACUUM), line, kind=FieldKind.wigner)
    expected = gaussian_field(grid, VACUUM + line)
    assert smoothed.sup_distance(expected) <= 1e-10


def test_convolution_rejects_indefinite_matrix() -> None:
    grid = PhaseGrid.symmetric(128, 12.0, 12.0)
    with pytest.raises(DomainError):
        convolve(gaussian_field(grid, VACUUM), CorrelationMatrix(1.0, 0.0, -0.1))


def test_convolution_coverage() -> None:
    grid = PhaseGrid.symmetric(64, 8.0, 8.0)
    with pytest.raises(CoverageError):
        convolve(gaussian_field(grid, VACUUM), CorrelationMatrix.diag(4.0, 4.0))


def test_shear_is_free_streaming() -> None:
    grid = PhaseGrid.symmetric(256, 12.0, 12.0)
    sheared = shear(gaussian_field(grid, VACUUM), 1.0)
    expected = gaussian_field(grid, VACUUM.congruence(np.array([[1.0, 1.0], [0.0, 1.0]])))
    assert sheared.sup_distance(expected) <= 1e-10


def test_shear_coverage() -> None:
    grid = PhaseGrid.symmetric(128, 8.0, 8.0)
    with pytest.raises(CoverageError):
        shear(gaussian_field(grid, VACUUM), 2.0)


def test_support_sigmas() -> None:
    assert support_sigmas(1e-10) == pytest.approx(math.sqrt(20.0 * math.log(10.0)))
    assert math.exp(-0.5 * support_sigmas(1e-6) ** 2) == pytest.approx(1e-6)


def test_q_grid_centered() -> None:
    q_grid = QGrid.centered(64, 8.0)
    assert q_grid.dq == pytest.approx(0.25)
    assert q_grid.q[0] == pytest.approx(-8.0)
    assert q_grid.q_max == pytest.approx(8.0 - 0.25)


def test_config_hash_is_canonical() -> None:
    first = config_hash({"m": 1.0, "d": 2.0, "command": "evolve"})
    second = config_hash(json.loads('{"command": "evolve", "d": 2.0, "m": 1.0}'))
    assert first == second
    assert first != config_hash({"m": 1.0, "d": 2.5, "command": "evolve"})


def test_field_export_is_deterministic(tmp_path: Path) -> None:
    grid = PhaseGrid.symmetric(32, 8.0, 8.0)
    field = gaussian_field(grid, CorrelationMatrix.diag(1.0, 1.0))
    first, sidecar = write_field_csv(
        field, tmp_path / "a.csv", params={"m": 1.0}, config_digest="abc"
    )
    second, _ = write_field_csv(field, tmp_path / "b.csv", params={"m": 1.0}, config_digest="abc")
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(sidecar.read_text())["config_hash"] == "abc"
    restored = read_field_csv(first)
    assert restored.kind == FieldKind.wigner
    assert restored.grid == grid
    assert np.array_equal(restored.values, field.values)
