from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.core.errors import DomainError
from src.core.export import write_table
from src.core.grid import QGrid
from src.states.pointer import Wavefunction

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
PSD_TOL = 1e-8


@dataclass(frozen=True, slots=True, eq=False)
class DensityMatrix:
    """Position-representation density matrix, entries[k, l] = rho(q_k, q_l).

    Trace and spectrum are taken with the quadrature weight dq.
    """

    q_grid: QGrid
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=complex, copy=True)
        n = self.q_grid.n
        if entries.shape != (n, n):
            raise DomainError(f"density matrix shape {entries.shape} does not match grid size {n}")
        if not np.all(np.isfinite(entries)):
            raise DomainError("density matrix entries must be finite")
        skew = float(np.abs(entries - entries.conj().T).max())
        if skew > HERMITIAN_TOL:
            raise DomainError(f"density matrix is not Hermitian (sup skew {skew:.3e})")
        trace = float(np.real(np.trace(entries)) * self.q_grid.dq)
        if abs(trace - 1.0) > TRACE_TOL:
            raise DomainError(f"density matrix trace {trace:.12f} differs from 1")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def pure(cls, psi: Wavefunction) -> "DensityMatrix":
        return cls(q_grid=psi.q_grid, entries=np.outer(psi.values, psi.values.conj()))

    @property
    def trace(self) -> float:
        return float(self.diagonal().sum() * self.q_grid.dq)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries * self.q_grid.dq)

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues()[0])

    def is_psd(self, tol: float = PSD_TOL) -> bool:
        return self.min_eigenvalue() >= -tol

    def validate(self, tol: float = PSD_TOL) -> "DensityMatrix":
        """Return self, or raise DomainError if an eigenvalue is below -tol."""
        lowest = self.min_eigenvalue()
        if lowest < -tol:
            raise DomainError(f"density matrix is not positive (min eigenvalue {lowest:.3e})")
        return self

    def purity(self) -> float:
        dq = self.q_grid.dq
        return float(np.real(np.sum(self.entries * self.entries.T)) * dq * dq)

    def edge_ratio(self) -> float:
        """Largest boundary-row or boundary-column magnitude over the peak magnitude."""
        entries = np.abs(self.entries)
        edge = max(
            float(entries[0, :].max()),
            float(entries[-1, :].max()),
            float(entries[:, 0].max()),
            float(entries[:, -1].max()),
        )
        return edge / float(entries.max())

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.entries)).copy()

    def components(self, *, cutoff: float = 1e-14) -> tuple[np.ndarray, np.ndarray]:
        """Eigen-decomposition rho = sum_k w_k |phi_k><phi_k| with unit-norm phi_k columns."""
        dq = self.q_grid.dq
        weights, vectors = np.linalg.eigh(self.entries * dq)
        keep = np.abs(weights) > cutoff * max(float(np.abs(weights).max()), 1.0)
        return weights[keep], vectors[:, keep] / np.sqrt(dq)

    def write_csv(self, path: Path) -> Path:
        """Rows ``q,q_prime,re,im`` in q-major order."""
        q = self.q_grid.q
        qq, qq_prime = np.meshgrid(q, q, indexing="ij")
        return write_table(
            path, ["q", "q_prime", "re", "im"], [qq, qq_prime, self.entries.real, self.entries.imag]
        )


def trace_distance(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    if not rho1.q_grid.same_as(rho2.q_grid):
        raise DomainError("density matrices live on different position grids")
    difference = (rho1.entries - rho2.entries) * rho1.q_grid.dq
    return 0.5 * float(np.abs(np.linalg.eigvalsh(difference)).sum())
