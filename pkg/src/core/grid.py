import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from src.core.config import settings
from src.core.covariance import CorrelationMatrix
from src.core.errors import DomainError

TWO_PI = 2.0 * math.pi


class FieldKind(str, Enum):
    wigner = "Wigner"
    q = "Q"
    p = "P"
    generic = "generic"


NORMALIZED_KINDS = frozenset({FieldKind.wigner, FieldKind.q, FieldKind.p})


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True, slots=True)
class PhaseGrid:
    """Uniform periodic grid on [x_min, x_max) x [p_min, p_max).

    Samples are x_i = x_min + i*dx with dx = (x_max - x_min)/n_x (the upper
    bound is excluded), likewise for p.
    """

    n_x: int
    n_p: int
    x_min: float
    x_max: float
    p_min: float
    p_max: float

    def __post_init__(self) -> None:
        for label, n in (("n_x", self.n_x), ("n_p", self.n_p)):
            if n < 8 or not _is_power_of_two(n):
                raise DomainError(f"{label} must be a power of two >= 8, got {n}")
        if not (self.x_max > self.x_min and self.p_max > self.p_min):
            raise DomainError("grid bounds must satisfy x_min < x_max and p_min < p_max")

    @classmethod
    def symmetric(cls, n: int | None = None, x_extent: float | None = None,
                  p_extent: float | None = None, *, n_p: int | None = None) -> "PhaseGrid":
        n = n or settings.grid_n
        x_extent = settings.grid_x_extent if x_extent is None else x_extent
        p_extent = settings.grid_p_extent if p_extent is None else p_extent
        return cls(n, n_p or n, -x_extent, x_extent, -p_extent, p_extent)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / self.n_p

    @property
    def cell(self) -> float:
        """Integration weight dx*dp/2pi of one sample (the dGamma convention)."""
        return self.dx * self.dp / TWO_PI

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_x, self.n_p)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n_x)

    @property
    def p(self) -> np.ndarray:
        return self.p_min + self.dp * np.arange(self.n_p)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.p, indexing="ij")

    def angular_frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        """FFT-ordered angular frequencies conjugate to x and p."""
        kx = TWO_PI * np.fft.fftfreq(self.n_x, d=self.dx)
        kp = TWO_PI * np.fft.fftfreq(self.n_p, d=self.dp)
        return kx, kp

    def index_of(self, x: float, p: float) -> tuple[int, int]:
        i = int(round((x - self.x_min) / self.dx))
        j = int(round((p - self.p_min) / self.dp))
        return min(max(i, 0), self.n_x - 1), min(max(j, 0), self.n_p - 1)

    def q_grid(self) -> "QGrid":
        """Position grid sharing this grid's x samples."""
        return QGrid(q_min=self.x_min, n=self.n_x, dq=self.dx)

    def metadata(self) -> dict[str, Any]:
        return {
            "nx": self.n_x,
            "np": self.n_p,
            "x_min": self.x_min,
            "x_max": self.x_max,
            "p_min": self.p_min,
            "p_max": self.p_max,
        }


@dataclass(frozen=True, slots=True)
class QGrid:
    """Uniform 1-D position grid q_k = q_min + k*dq, k = 0..n-1."""

    q_min: float
    n: int
    dq: float

    def __post_init__(self) -> None:
        if self.n < 8:
            raise DomainError(f"position grid needs at least 8 samples, got {self.n}")
        if not self.dq > 0.0:
            raise DomainError(f"position spacing must be positive, got {self.dq}")

    @classmethod
    def centered(cls, n: int, extent: float) -> "QGrid":
        dq = 2.0 * extent / n
        return cls(q_min=-extent, n=n, dq=dq)

    @property
    def q(self) -> np.ndarray:
        return self.q_min + self.dq * np.arange(self.n)

    @property
    def q_max(self) -> float:
        return self.q_min + self.dq * (self.n - 1)

    def same_as(self, other: "QGrid", *, rtol: float = 1e-12) -> bool:
        return (
            self.n == other.n
            and math.isclose(self.dq, other.dq, rel_tol=rtol)
            and math.isclose(self.q_min, other.q_min, rel_tol=rtol, abs_tol=rtol * self.dq)
        )


@dataclass(frozen=True, slots=True, eq=False)
class GridField:
    """Real samples of a phase-space function, values[i, j] = f(x_i, p_j)."""

    grid: PhaseGrid
    values: np.ndarray
    kind: FieldKind = FieldKind.generic
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float, copy=True)
        if values.shape != self.grid.shape:
            raise DomainError(f"values shape {values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "kind", FieldKind(self.kind))
        if self.kind in NORMALIZED_KINDS:
            self.check_normalized(settings.normalization_tol)

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell)

    def check_normalized(self, tol: float) -> None:
        total = self.integral()
        if abs(total - 1.0) > tol:
            raise DomainError(
                f"{self.kind.value} field integrates to {total:.10f} under dGamma, "
                f"expected 1 +- {tol:g}"
            )

    def max_abs(self) -> float:
        return float(np.abs(self.values).max())

    def with_values(self, values: np.ndarray, *, kind: FieldKind | None = None,
                    meta: dict[str, Any] | None = None) -> "GridField":
        return GridField(
            grid=self.grid,
            values=values,
            kind=self.kind if kind is None else kind,
            meta=dict(self.meta if meta is None else meta),
        )

    def sup_distance(self, other: "GridField") -> float:
        if other.grid != self.grid:
            raise DomainError("fields live on different grids")
        return float(np.abs(self.values - other.values).max())

    def l1_distance(self, other: "GridField") -> float:
        if other.grid != self.grid:
            raise DomainError("fields live on different grids")
        return float(np.abs(self.values - other.values).sum() * self.grid.cell)


def phase_moments(f: GridField) -> tuple[tuple[float, float], CorrelationMatrix]:
    """Mean and central second moments of f under dGamma (f need not be positive)."""
    x, p = f.grid.mesh()
    weights = f.values * f.grid.cell
    norm = float(weights.sum())
    if norm == 0.0:
        raise DomainError("field has zero total weight")
    mean_x = float((weights * x).sum() / norm)
    mean_p = float((weights * p).sum() / norm)
    dx, dp = x - mean_x, p - mean_p
    cov = CorrelationMatrix(
        float((weights * dx * dx).sum() / norm),
        float((weights * dx * dp).sum() / norm),
        float((weights * dp * dp).sum() / norm),
    )
    return (mean_x, mean_p), cov
