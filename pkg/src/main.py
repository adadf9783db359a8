import argparse
import json
import sys
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from src.core.config import settings
from src.pipeline.runner import COMMANDS, EXIT_VALIDATION, run
from src.schemas.config import RunConfig


def _floats(text: str) -> list[float]:
    return [float(item) for item in text.split(",") if item.strip()]


def _alpha_pairs(text: str) -> list[tuple[float, float]]:
    """``re:im`` pairs, comma separated."""
    pairs = []
    for item in text.split(","):
        if item.strip():
            re_part, _, im_part = item.partition(":")
            pairs.append((float(re_part), float(im_part or 0.0)))
    return pairs


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", default=None, help="JSON file with run settings; flags override it."
    )
    common.add_argument(
        "--out", default=None, help=f"Output directory (default: {settings.out_dir})."
    )
    common.add_argument("--m", type=float, default=None, help="Particle mass.")
    common.add_argument("--d", type=float, default=None, help="Decoherence strength D.")
    common.add_argument("--alpha-re", type=float, default=None, help="Re(alpha) in 1/sigma0^2.")
    common.add_argument("--alpha-im", type=float, default=None, help="Im(alpha) in 1/sigma0^2.")
    common.add_argument("--state", choices=["vacuum", "fock1", "cat", "gaussian"], default=None)
    common.add_argument("--sep", type=float, default=None, help="Cat separation in sigma0.")
    common.add_argument("--grid", type=int, default=None, help="Samples per axis (power of two).")
    common.add_argument("--x-extent", type=float, default=None, help="Half-width in sigma0.")
    common.add_argument("--p-extent", type=float, default=None, help="Half-height in 1/sigma0.")
    common.add_argument("--t", type=float, default=None, help="Evolution time in t0.")
    common.add_argument("--probes", type=int, default=None, help="Number of probe times.")
    common.add_argument("--t-probe-min", type=float, default=None, help="First probe in t0.")
    common.add_argument("--t-probe-max", type=float, default=None, help="Last probe in t0.")
    common.add_argument(
        "--m-values", type=_floats, default=None, help="Sweep masses, comma separated."
    )
    common.add_argument(
        "--d-values", type=_floats, default=None, help="Sweep D values, comma separated."
    )
    common.add_argument(
        "--alphas",
        type=_alpha_pairs,
        default=None,
        help="Sweep pointer widths as re:im pairs in 1/sigma0^2, comma separated.",
    )

    parser = argparse.ArgumentParser(
        prog="phasepos",
        description=(
            "Evolve phase-space distributions under position decoherence and certify "
            "when Wigner and P functions become positive."
        ),
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common])
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    data: dict[str, Any] = {}
    if args.config:
        data.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
    overrides = {
        key: value
        for key, value in vars(args).items()
        if key not in {"config", "command"} and value is not None
    }
    data.update(overrides)
    data["command"] = args.command
    return RunConfig.model_validate(data)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
    except ValidationError as exc:
        print(f"Invalid configuration:\n{exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, json.JSONDecodeError) as exc:
        print(f"Could not read config file: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    raise SystemExit(main())
