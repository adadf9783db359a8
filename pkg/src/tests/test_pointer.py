import math

import numpy as np
import pytest

from src.core.covariance import CorrelationMatrix
from src.core.errors import CoverageError, DomainError
from src.core.grid import PhaseGrid, QGrid
from src.core.params import SystemParams
from src.states.pointer import (
    PointerFamily,
    Wavefunction,
    c_quarter,
    completeness_residual,
    family_from_matrix,
    make_family,
    overlap_sq,
    pointer_wavefunction,
)


def test_uncertainty_determinant_is_quarter(params: SystemParams) -> None:
    rng = np.random.default_rng(7)
    for alpha_re, alpha_im in zip(rng.uniform(0.1, 10.0, 1000), rng.uniform(-10.0, 10.0, 1000)):
        c = c_quarter(make_family(complex(alpha_re, alpha_im), params))
        assert abs(c.det - 0.25) <= 1e-10
        assert c.is_positive_definite()


def test_robust_uncertainty_matrix(robust: PointerFamily) -> None:
    c = c_quarter(robust)
    expected = CorrelationMatrix(1.0 / math.sqrt(2.0), 0.5, 1.0 / math.sqrt(2.0))
    assert c.max_abs_diff(expected) <= 1e-12


def test_family_from_matrix(params: SystemParams) -> None:
    family = make_family(complex(1.3, -0.7), params)
    recovered = family_from_matrix(c_quarter(family), params)
    assert recovered.alpha == pytest.approx(family.alpha, rel=1e-12)
    with pytest.raises(DomainError):
        family_from_matrix(CorrelationMatrix.diag(1.0, 1.0), params)


def test_make_family_rejects_non_normalizable(params: SystemParams) -> None:
    with pytest.raises(DomainError):
        make_family(complex(0.0, 1.0), params)


def test_overlap_matches_quadrature(robust: PointerFamily) -> None:
    q_grid = QGrid.centered(256, 12.0)
    first, second = (0.5, 0.3), (-0.4, 1.0)
    psi1 = pointer_wavefunction(robust, first, q_grid)
    psi2 = pointer_wavefunction(robust, second, q_grid)
    assert abs(psi1.inner(psi2)) ** 2 == pytest.approx(overlap_sq(robust, first, second), abs=1e-10)
    assert overlap_sq(robust, first, first) == 1.0


def test_coherent_state_overlap(symmetric: PointerFamily) -> None:
    dx, dp = 0.8, -0.6
    expected = math.exp(-0.5 * (dx * dx + dp * dp))
    assert overlap_sq(symmetric, (0.0, 0.0), (dx, dp)) == pytest.approx(expected, rel=1e-12)


def test_completeness(robust: PointerFamily) -> None:
    q_grid = QGrid.centered(64, 8.0)
    reach = math.pi / q_grid.dq
    gamma_grid = PhaseGrid(128, 64, -16.0, 16.0, -reach, reach)
    assert completeness_residual(robust, gamma_grid, q_grid) <= 1e-10


def test_completeness_degrades_on_coarse_centres(robust: PointerFamily) -> None:
    q_grid = QGrid.centered(64, 8.0)
    reach = math.pi / q_grid.dq
    fine = PhaseGrid(128, 64, -16.0, 16.0, -reach, reach)
    coarse = PhaseGrid(16, 64, -16.0, 16.0, -reach, reach)
    assert completeness_residual(robust, coarse, q_grid) > 5e-3
    assert completeness_residual(robust, coarse, q_grid) > completeness_residual(
        robust, fine, q_grid
    )


def test_pointer_wavefunction_coverage(robust: PointerFamily) -> None:
    with pytest.raises(CoverageError):
        pointer_wavefunction(robust, (11.0, 0.0), QGrid.centered(256, 12.0))


def test_wavefunction_requires_unit_norm() -> None:
    q_grid = QGrid.centered(64, 8.0)
    with pytest.raises(DomainError):
        Wavefunction(q_grid=q_grid, values=np.ones(q_grid.n))
