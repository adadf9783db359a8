from dataclasses import dataclass

import numpy as np

from src.core.errors import DomainError

QUARTER = 0.25


@dataclass(frozen=True, slots=True)
class CorrelationMatrix:
    """Symmetric 2x2 phase-space covariance [[cxx, cxp], [cxp, cpp]].

    Symmetry is structural: only three numbers are stored.
    """

    cxx: float
    cxp: float
    cpp: float

    @classmethod
    def zero(cls) -> "CorrelationMatrix":
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def diag(cls, cxx: float, cpp: float) -> "CorrelationMatrix":
        return cls(float(cxx), 0.0, float(cpp))

    @classmethod
    def from_array(cls, matrix: np.ndarray, *, atol: float = 1e-12) -> "CorrelationMatrix":
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (2, 2):
            raise DomainError(f"expected a 2x2 matrix, got shape {matrix.shape}")
        if abs(matrix[0, 1] - matrix[1, 0]) > atol * max(1.0, float(np.abs(matrix).max())):
            raise DomainError("correlation matrix must be symmetric")
        off_diagonal = 0.5 * float(matrix[0, 1] + matrix[1, 0])
        return cls(float(matrix[0, 0]), off_diagonal, float(matrix[1, 1]))

    @property
    def det(self) -> float:
        return self.cxx * self.cpp - self.cxp * self.cxp

    def as_array(self) -> np.ndarray:
        return np.array([[self.cxx, self.cxp], [self.cxp, self.cpp]], dtype=float)

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.as_array())

    def min_eigenvalue(self) -> float:
        return float(self.eigvals()[0])

    def is_zero(self) -> bool:
        return self.cxx == 0.0 and self.cxp == 0.0 and self.cpp == 0.0

    def is_psd(self, tol: float = 0.0) -> bool:
        """cxx >= 0, cpp >= 0 and det >= 0, each relaxed by ``tol`` (scaled to the entries)."""
        scale = max(1.0, abs(self.cxx), abs(self.cpp))
        return (
            self.cxx >= -tol * scale
            and self.cpp >= -tol * scale
            and self.det >= -tol * scale * scale
        )

    def is_positive_definite(self) -> bool:
        return self.cxx > 0.0 and self.det > 0.0

    def congruence(self, transform: np.ndarray) -> "CorrelationMatrix":
        """Return S C S^T."""
        s = np.asarray(transform, dtype=float)
        return CorrelationMatrix.from_array(s @ self.as_array() @ s.T)

    def quadratic_form(self, kx: np.ndarray, kp: np.ndarray) -> np.ndarray:
        return self.cxx * kx * kx + 2.0 * self.cxp * kx * kp + self.cpp * kp * kp

    def inverse(self) -> "CorrelationMatrix":
        det = self.det
        if det <= 0.0:
            raise DomainError(f"matrix is singular or indefinite (det={det:.3e})")
        return CorrelationMatrix(self.cpp / det, -self.cxp / det, self.cxx / det)

    def marginal_std(self) -> tuple[float, float]:
        return float(np.sqrt(max(self.cxx, 0.0))), float(np.sqrt(max(self.cpp, 0.0)))

    def __add__(self, other: "CorrelationMatrix") -> "CorrelationMatrix":
        return CorrelationMatrix(self.cxx + other.cxx, self.cxp + other.cxp, self.cpp + other.cpp)

    def __sub__(self, other: "CorrelationMatrix") -> "CorrelationMatrix":
        return CorrelationMatrix(self.cxx - other.cxx, self.cxp - other.cxp, self.cpp - other.cpp)

    def __mul__(self, factor: float) -> "CorrelationMatrix":
        return CorrelationMatrix(self.cxx * factor, self.cxp * factor, self.cpp * factor)

    __rmul__ = __mul__

    def max_abs_diff(self, other: "CorrelationMatrix") -> float:
        return max(
            abs(self.cxx - other.cxx),
            abs(self.cxp - other.cxp),
            abs(self.cpp - other.cpp),
        )


def det_condition(c: CorrelationMatrix, *, tol: float = 1e-12) -> bool:
    """Positivity lemma: g(C) * W >= 0 for every Wigner function iff |C| >= 1/4.

    ``tol`` only absorbs rounding in the determinant at the boundary |C| = 1/4.
    """
    return c.is_psd(tol) and c.det >= QUARTER - tol
