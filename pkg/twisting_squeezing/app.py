"""Command-line wiring: argument parsing, config assembly and command dispatch."""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from .commands import COMMANDS
from .errors import ConfigError
from .models import ControlMode, Engine, Preset
from .tools.config_tools import load_run_config, log_level_from_env

logger = logging.getLogger(__name__)


def _floats(count: int, name: str) -> Callable[[str], List[float]]:
    def parse(text: str) -> List[float]:
        try:
            values = [float(part) for part in text.split(",")]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"{name} must be {count} comma-separated numbers") from exc
        if len(values) != count:
            raise argparse.ArgumentTypeError(f"{name} needs {count} values, got {len(values)}")
        return values
    return parse


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError("--n-list must be comma-separated integers") from exc


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--engine", choices=[e.value for e in Engine], help="Simulation engine")
    parser.add_argument("--n", dest="n_particles", help="Particle number N, or 'inf'")
    parser.add_argument("--n-list", dest="n_list", type=_int_list, help="Particle numbers for compare, e.g. 10,60")
    parser.add_argument("--chi", type=_floats(3, "--chi"), help="Diagonal chi_xx,chi_yy,chi_zz")
    parser.add_argument("--chi-full", dest="chi_full", type=_floats(6, "--chi-full"),
                        help="chi_xx,chi_yy,chi_zz,chi_xy,chi_xz,chi_yz")
    parser.add_argument("--preset", choices=[p.value for p in Preset], help="Diagonal tensor preset")
    parser.add_argument("--omega", type=_floats(3, "--omega"), help="Rotation vector omega_x,omega_y,omega_z")
    parser.add_argument("--omega-tilde", dest="omega_tilde", type=float,
                        help="Scaled rotation rate for the scaled engine")
    parser.add_argument("--control", choices=[c.value for c in ControlMode], help="Rotation control")
    parser.add_argument("--theta0", type=float, help="Initial polar angle (rad)")
    parser.add_argument("--phi0", type=float, help="Initial azimuth (rad)")
    parser.add_argument("--tau-max", dest="tau_max", type=float, help="Final scaled time")
    parser.add_argument("--dtau", type=float, help="Scaled integration step (default 1e-4)")
    parser.add_argument("--stride", type=int, help="Keep every STRIDE-th step")
    parser.add_argument("--dt-control", dest="dt_control", type=float,
                        help="Exact-engine control step in physical time (default 1e-3/N)")
    parser.add_argument("--physical-time", dest="physical_time", action="store_true", default=None,
                        help="Report t = tau/N instead of tau")
    parser.add_argument("--grid", help="Grid resolution TxP, e.g. 181x360")
    parser.add_argument("--out", help="Output path")
    parser.add_argument("--debug", action="store_true", default=argparse.SUPPRESS,
                        help="Run in debug mode with additional logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twisting-squeezing",
        description="Twisting-tensor simulations of quadratic spin squeezing",
    )
    parser.add_argument("--debug", action="store_true", help="Run in debug mode with additional logging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    help_text = {
        "evolve": "Squeezing time series from one engine",
        "compare": "Exact finite-N xi2 against the N -> inf closed form",
        "landscape": "Energy and squeezing-rate grids of coherent states",
        "husimi": "Husimi function of an exactly evolved state",
        "device": "Twisting tensor of an interferometer chain or LMG model",
    }
    for name in COMMANDS:
        _add_run_options(subparsers.add_parser(name, help=help_text[name]))
    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Flag values that were actually given."""
    skip = {"command", "config", "debug"}
    return {key: value for key, value in vars(args).items() if key not in skip and value is not None}


def configure_logging(debug: bool = False) -> None:
    level = logging.DEBUG if debug else getattr(logging, log_level_from_env())
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse `argv`, run the command and return its exit code."""
    return execute(build_parser().parse_args(argv))


def execute(args: argparse.Namespace) -> int:
    """Run the command of already parsed arguments and return its exit code."""
    try:
        config = load_run_config(args.config, config_overrides(args))
    except ConfigError as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code

    result = COMMANDS[args.command](config)
    if not result.success:
        print(f"error: {result.error}", file=sys.stderr)
        return result.exit_code
    for path in result.output_paths:
        print(f"Wrote {path}")
    return result.exit_code
