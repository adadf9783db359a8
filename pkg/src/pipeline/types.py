from dataclasses import dataclass

from src.core.grid import GridField
from src.core.params import SystemParams, Units
from src.states.density import DensityMatrix
from src.states.pointer import PointerFamily


@dataclass(slots=True)
class PreparedState:
    name: str
    params: SystemParams
    units: Units
    family: PointerFamily
    rho: DensityMatrix
    w0: GridField


@dataclass(slots=True)
class SweepPoint:
    index: int
    m: float
    d: float
    alpha_re: float | None
    alpha_im: float | None


@dataclass(slots=True)
class SweepRow:
    index: int
    m: float
    d: float
    alpha_re: float
    alpha_im: float
    admissible: bool
    t_wigner: float
    t_factorization: float
    t_p: float
