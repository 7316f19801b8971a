"""Building and interpreting RunConfig: JSON files, flag overrides, tensor sources."""

import json
import logging
import os
from typing import Any, Dict, Optional

import numpy as np
from pydantic import ValidationError

from ..errors import ConfigError, TwistingError
from ..models import PRESET_DIAGONALS, RunConfig, TwistingTensor
from .device_map import chain_stages, lmg_to_tensor

logger = logging.getLogger(__name__)

LOG_LEVEL_ENV = "TWISTING_SQUEEZING_LOG_LEVEL"


def _describe(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "config"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def read_config_file(path: str) -> Dict[str, Any]:
    """Load a JSON config file into a dict."""
    try:
        with open(path, "r", encoding="utf-8") as stream:
            data = json.load(stream)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def load_run_config(config_path: Optional[str] = None,
                    overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Merge model defaults, a JSON file and flag overrides (highest wins).

    Args:
        config_path: Optional JSON config file.
        overrides: Values given on the command line; None entries are ignored.

    Returns:
        A validated RunConfig.

    Raises:
        ConfigError: If the merged values violate any RunConfig constraint.
    """
    data: Dict[str, Any] = read_config_file(config_path) if config_path else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {_describe(exc)}") from exc
    logger.debug("Run config: %s", config.model_dump(mode="json", exclude_none=True))
    return config


def resolve_tensor(config: RunConfig) -> TwistingTensor:
    """The twisting tensor named by the single tensor source of `config`."""
    device_source = config.stages is not None or config.lmg is not None
    if device_source and any(config.omega):
        raise ConfigError("omega cannot be combined with stages or lmg; the device fixes it")
    try:
        if config.chi is not None:
            return TwistingTensor.diagonal(*config.chi, omega=config.omega)
        if config.chi_full is not None:
            return TwistingTensor.from_components(config.chi_full, omega=config.omega)
        if config.preset is not None:
            return TwistingTensor.diagonal(*PRESET_DIAGONALS[config.preset], omega=config.omega)
        if config.stages is not None:
            return chain_stages(config.stages)
        return lmg_to_tensor(config.lmg)
    except (ValueError, TwistingError) as exc:
        raise ConfigError(f"cannot build the twisting tensor: {exc}") from exc


def require_diagonal(tensor: TwistingTensor, engine: str) -> np.ndarray:
    """Diagonal (χ_xx, χ_yy, χ_zz), or ConfigError for an off-diagonal χ."""
    if not tensor.is_diagonal:
        raise ConfigError(f"{engine} needs a diagonal twisting tensor")
    return np.diag(tensor.chi).copy()


def require_output(config: RunConfig) -> str:
    if not config.out:
        raise ConfigError("an output path is required (--out)")
    return config.out


def require_particles(config: RunConfig, command: str) -> int:
    if config.n_particles is None:
        raise ConfigError(f"{command} needs a finite particle number (--n)")
    return config.n_particles


def log_level_from_env(default: str = "WARNING") -> str:
    level = os.environ.get(LOG_LEVEL_ENV, default).upper()
    if level not in ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"):
        logger.warning("Ignoring %s=%s", LOG_LEVEL_ENV, level)
        return default
    return level
