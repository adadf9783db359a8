import os
from pathlib import Path

from pydantic_settings import BaseSettings, SettingsConfigDict


PROJECT_ROOT = Path(__file__).resolve().parents[2]


class Settings(BaseSettings):
    app_name: str = "phase-positivity"
    log_level: str = "INFO"

    # PHASEPOS_THREADS caps the sweep worker pool; unset means one worker per CPU.
    threads: int | None = None

    grid_n: int = 512
    grid_x_extent: float = 12.0
    grid_p_extent: float = 12.0

    coverage_sigmas: float = 6.0
    support_tol: float = 1e-10
    positivity_rel_tol: float = 1e-8
    normalization_tol: float = 1e-6
    psd_tol: float = 1e-12

    root_xtol: float = 1e-10
    fd_dt_factor: float = 0.25

    probe_count: int = 64
    probe_t_min: float = 0.1
    probe_t_max: float = 4.0

    deconvolution_cutoff: float = 1e8

    out_dir: str = "out"

    model_config = SettingsConfigDict(
        env_prefix="PHASEPOS_",
        env_file=str(PROJECT_ROOT / ".env"),
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @property
    def worker_count(self) -> int:
        if self.threads is not None and self.threads > 0:
            return self.threads
        return os.cpu_count() or 1


settings = Settings()
