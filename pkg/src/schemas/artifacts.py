from typing import Any

from pydantic import BaseModel, Field


class GridMeta(BaseModel):
    nx: int
    np: int
    x_min: float
    x_max: float
    p_min: float
    p_max: float


class FieldSidecar(BaseModel):
    """JSON written next to every exported CSV."""

    kind: str
    grid: GridMeta | None = None
    params: dict[str, float] = Field(default_factory=dict)
    reliable: bool = True
    reason: str | None = None
    config_hash: str | None = None
    extra: dict[str, Any] = Field(default_factory=dict)


class ManifestEntry(BaseModel):
    path: str
    sidecar: str | None = None
    kind: str


class Manifest(BaseModel):
    command: str
    config_hash: str
    exit_code: int
    files: list[ManifestEntry] = Field(default_factory=list)
