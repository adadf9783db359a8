from collections.abc import Sequence
from pathlib import Path

import numpy as np

from src.core.export import write_table
from src.core.grid import GridField
from src.core.params import SystemParams
from src.evolution.propagators import evolve_wigner
from src.schemas.reports import TraceRow


def second_momentum(f: GridField) -> float:
    """<p^2> under dGamma (raw moment, not centred)."""
    _, p = f.grid.mesh()
    return float((f.values * p * p).sum() * f.grid.cell)


def evolution_trace(w0: GridField, params: SystemParams, times: Sequence[float]) -> list[TraceRow]:
    """One row per time, each evolved from w0 directly."""
    rows = []
    for t in times:
        w = evolve_wigner(w0, params, float(t))
        rows.append(
            TraceRow(
                t=float(t),
                min_value=float(w.values.min()),
                norm=w.integral(),
                p2=second_momentum(w),
            )
        )
    return rows


def write_trace_csv(rows: Sequence[TraceRow], path: Path) -> Path:
    header = ["t", "min_value", "norm", "p2"]
    columns = [np.array([getattr(row, name) for row in rows]) for name in header]
    return write_table(path, header, columns)
