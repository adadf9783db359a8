import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from src.core.grid import FieldKind, GridField, PhaseGrid
from src.core.log import get_logger
from src.schemas.artifacts import FieldSidecar, GridMeta

logger = get_logger(__name__)

CSV_FORMAT = "%.17g"


def config_hash(config: dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of a run configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_table(path: Path, header: list[str], columns: list[np.ndarray]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([np.asarray(column, dtype=float).ravel() for column in columns])
    np.savetxt(path, table, delimiter=",", header=",".join(header), comments="", fmt=CSV_FORMAT)
    return path


def write_sidecar(path: Path, sidecar: FieldSidecar) -> Path:
    sidecar_path = path.with_suffix(".json")
    sidecar_path.write_text(sidecar.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return sidecar_path


def write_field_csv(
    f: GridField,
    path: Path,
    *,
    params: dict[str, float] | None = None,
    config_digest: str | None = None,
) -> tuple[Path, Path]:
    """Write ``x,p,value`` rows (x-major) plus the JSON sidecar describing the grid."""
    x, p = f.grid.mesh()
    write_table(path, ["x", "p", "value"], [x, p, f.values])
    sidecar = FieldSidecar(
        kind=f.kind.value,
        grid=GridMeta(**f.grid.metadata()),
        params=dict(params or {}),
        reliable=bool(f.meta.get("reliable", True)),
        reason=f.meta.get("reason"),
        config_hash=config_digest,
        extra={key: value for key, value in f.meta.items() if key not in {"reliable", "reason"}},
    )
    sidecar_path = write_sidecar(path, sidecar)
    logger.info("[export] field kind=%s path=%s", f.kind.value, path)
    return path, sidecar_path


def read_field_csv(path: Path) -> GridField:
    sidecar_text = path.with_suffix(".json").read_text(encoding="utf-8")
    sidecar = FieldSidecar.model_validate_json(sidecar_text)
    if sidecar.grid is None:
        raise ValueError(f"sidecar for {path} carries no grid metadata")
    meta = sidecar.grid
    grid = PhaseGrid(meta.nx, meta.np, meta.x_min, meta.x_max, meta.p_min, meta.p_max)
    table = np.loadtxt(path, delimiter=",", skiprows=1)
    values = table[:, 2].reshape(grid.shape)
    extra = dict(sidecar.extra)
    extra.update(reliable=sidecar.reliable, reason=sidecar.reason)
    return GridField(grid=grid, values=values, kind=FieldKind(sidecar.kind), meta=extra)
