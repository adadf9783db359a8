import math
from collections.abc import Sequence

import numpy as np

from src.core.errors import DomainError
from src.core.grid import QGrid
from src.states.density import DensityMatrix
from src.states.pointer import (
    PhasePoint,
    PointerFamily,
    Wavefunction,
    pointer_wavefunction,
)


def gaussian_density(family: PointerFamily, gamma: PhasePoint, q_grid: QGrid) -> DensityMatrix:
    """The pure pointer state |Gamma><Gamma|; its Wigner function is g(. - Gamma; C_1/4)."""
    return DensityMatrix.pure(pointer_wavefunction(family, gamma, q_grid))


def fock_wavefunction(n: int, q_grid: QGrid, *, width: float = 1.0) -> Wavefunction:
    """Hermite-Gaussian eigenstate n of the width-``width`` oscillator (alpha = 2 at width 1)."""
    if n < 0:
        raise DomainError(f"Fock index must be non-negative, got {n}")
    u = q_grid.q / width
    previous = np.zeros_like(u)
    current = np.pi ** -0.25 * np.exp(-0.5 * u * u)
    for k in range(n):
        following = math.sqrt(2.0 / (k + 1)) * u * current - math.sqrt(k / (k + 1)) * previous
        previous, current = current, following
    return Wavefunction(q_grid=q_grid, values=current / math.sqrt(width))


def fock_density(n: int, q_grid: QGrid, *, width: float = 1.0) -> DensityMatrix:
    return DensityMatrix.pure(fock_wavefunction(n, q_grid, width=width))


def vacuum_density(q_grid: QGrid, *, width: float = 1.0) -> DensityMatrix:
    return fock_density(0, q_grid, width=width)


def cat_wavefunction(separation: float, family: PointerFamily, q_grid: QGrid) -> Wavefunction:
    """(|(-d/2, 0)> + |(d/2, 0)>) / sqrt(2 + 2 <-|+>) for pointer states of ``family``."""
    if not separation > 0.0:
        raise DomainError(f"cat separation must be positive, got {separation}")
    half = 0.5 * separation
    left = pointer_wavefunction(family, (-half, 0.0), q_grid)
    right = pointer_wavefunction(family, (half, 0.0), q_grid)
    alpha = family.alpha
    # <-|+> for equal momenta is real: exp(-|alpha|^2 d^2 / 8 alpha_R)
    cross = math.exp(-abs(alpha) ** 2 * separation * separation / (8.0 * family.alpha_re))
    scale = 1.0 / math.sqrt(2.0 * (1.0 + cross))
    return Wavefunction(q_grid=q_grid, values=scale * (left.values + right.values))


def cat_state(separation: float, family: PointerFamily, q_grid: QGrid) -> DensityMatrix:
    return DensityMatrix.pure(cat_wavefunction(separation, family, q_grid))


def mixture(states: Sequence[DensityMatrix], weights: Sequence[float]) -> DensityMatrix:
    if len(states) == 0 or len(states) != len(weights):
        raise DomainError("mixture needs one weight per state and at least one state")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0.0) or abs(float(w.sum()) - 1.0) > 1e-12:
        raise DomainError("mixture weights must be non-negative and sum to 1")
    grid = states[0].q_grid
    if any(not state.q_grid.same_as(grid) for state in states[1:]):
        raise DomainError("mixture components live on different position grids")
    entries = sum(weight * state.entries for weight, state in zip(w, states))
    return DensityMatrix(q_grid=grid, entries=entries).validate()
