class PhaseposError(Exception):
    """Base class for every error raised by the toolkit."""


class DomainError(PhaseposError, ValueError):
    """Input outside the physical or algebraic domain of an operation."""


class CoverageError(PhaseposError):
    """The sampling grid cannot hold the requested computation without wraparound."""

    def __init__(self, message: str, *, required: dict[str, float] | None = None) -> None:
        self.required = dict(required or {})
        if self.required:
            bounds = ", ".join(f"{key}={value:.6g}" for key, value in self.required.items())
            message = f"{message} (required: {bounds})"
        super().__init__(message)


class StabilityError(PhaseposError):
    """Explicit time step above the scheme's stability bound."""

    def __init__(self, message: str, *, bound: float) -> None:
        self.bound = bound
        super().__init__(f"{message} (dt must be <= {bound:.6g})")


class ThresholdError(DomainError):
    """Factorization C_W(t) - C_1/4 >= 0 does not hold yet at the requested time."""

    def __init__(self, message: str, *, t_min: float) -> None:
        self.t_min = t_min
        super().__init__(f"{message} (minimum admissible t = {t_min:.10g})")


class ContractViolation(PhaseposError):
    """A numerical contract (distance, drift, residual) exceeded its limit."""

    def __init__(self, message: str, *, measured: float, limit: float) -> None:
        self.measured = measured
        self.limit = limit
        super().__init__(f"{message}: measured={measured:.3e} limit={limit:.3e}")
