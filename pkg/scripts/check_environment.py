#!/usr/bin/env python3
import importlib
import platform
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from src.core.config import settings
from src.core.params import make_params
from src.positivity.thresholds import p_positivity_time, wigner_positivity_time
from src.states.pointer import robust_alpha

PACKAGES = [
    ("numpy", "numpy"),
    ("scipy", "scipy"),
    ("pydantic", "pydantic"),
    ("pydantic_settings", "pydantic-settings"),
]


def main() -> int:
    print("Dependency check:")
    print(f"- python: {platform.python_version()}")
    print(f"- executable: {sys.executable}")
    missing = 0
    for module_name, label in PACKAGES:
        try:
            module = importlib.import_module(module_name)
            print(f"- {label}: OK ({getattr(module, '__version__', 'unknown')})")
        except Exception as exc:
            print(f"- {label}: MISSING ({exc})")
            missing += 1
    if missing:
        return 1

    print(f"Runtime settings ({settings.app_name}):")
    print(f"- PHASEPOS_THREADS (resolved): {settings.worker_count}")
    print(f"- PHASEPOS_GRID_N: {settings.grid_n}")
    print(f"- PHASEPOS_LOG_LEVEL: {settings.log_level}")
    print(f"- PHASEPOS_OUT_DIR: {settings.out_dir}")

    params = make_params(1.0, 1.0)
    t_w = wigner_positivity_time(params)
    t_p = p_positivity_time(params, robust_alpha(params))
    if abs(t_w - 3.0 ** 0.25) > 1e-6 or not 1.96 <= t_p <= 1.98:
        print(f"ERROR: threshold smoke check failed (t_w={t_w:.6f}, t_p={t_p:.6f}).")
        return 2
    print(f"OK: thresholds t_w={t_w:.6f} t_p={t_p:.6f} (m = D = 1).")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
