#!/usr/bin/env python3
"""
Run configuration: presets, flat key = value files, environment and flags.

Precedence, lowest first: built-in defaults, --preset, --config FILE, flags.
"""

import logging
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator

from optosqueeze.errors import ConfigError
from optosqueeze.model.constants import TWO_PI
from optosqueeze.model.params import SystemParams, build_params, config_error
from optosqueeze.model.spectrum import DEFAULT_BATH_CUTOFF_FACTOR, DEFAULT_TOL, TOL_RANGE, CothModel
from optosqueeze.model.steadystate import BranchPolicy

logger = logging.getLogger("optosqueeze.config")

# config file key -> SystemParams field
PARAM_KEYS = {
    "wavelength_m": "wavelength_lambda",
    "cavity_length_m": "cavity_length_L",
    "mass_kg": "mass_m",
    "kappa_rad_s": "kappa",
    "omega_m_rad_s": "omega_m",
    "quality": "quality_Q",
    "power_w": "laser_power_P",
    "temperature_k": "temperature_T",
    "squeeze_r": "squeeze_r",
    "squeeze_phi": "squeeze_phi",
    "detuning0_rad_s": "detuning_Delta0",
}

RUN_KEYS = ("coth", "tol", "branch_policy", "output", "workers", "bath_cutoff_factor")

# keys whose flag values --hz converts from Hz to rad/s
FREQUENCY_KEYS = ("kappa_rad_s", "omega_m_rad_s", "detuning0_rad_s")

_GROEBLACHER_OMEGA_M = TWO_PI * 947e3

PRESETS: Dict[str, Dict[str, float]] = {
    "groeblacher": {
        "wavelength_m": 1064e-9,
        "cavity_length_m": 25e-3,
        "mass_kg": 145e-12,
        "kappa_rad_s": TWO_PI * 215e3,
        "omega_m_rad_s": _GROEBLACHER_OMEGA_M,
        "quality": 6700.0,
        "power_w": 6.9e-3,
        "temperature_k": 1e-3,
        "squeeze_r": 0.0,
        "squeeze_phi": 0.0,
        "detuning0_rad_s": _GROEBLACHER_OMEGA_M,
    },
}


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RunConfig(BaseModel):
    """Validated parameters plus the numerical and output settings of a run"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    params: SystemParams
    coth: Optional[CothModel] = None
    tol: float = Field(default=DEFAULT_TOL, ge=TOL_RANGE[0], le=TOL_RANGE[1])
    branch_policy: BranchPolicy = BranchPolicy.LOWEST_QS_STABLE
    output: Optional[OutputFormat] = None
    workers: int = Field(default=1, ge=1)
    bath_cutoff_factor: float = Field(default=DEFAULT_BATH_CUTOFF_FACTOR, gt=1)

    @field_validator("coth", mode="before")
    @classmethod
    def auto_coth(cls, value: Any) -> Any:
        if isinstance(value, str) and value.strip().lower() == "auto":
            return None
        return value

    @field_validator("coth")
    @classmethod
    def check_coth_temperature(cls, coth: Optional[CothModel], info: ValidationInfo) -> Optional[CothModel]:
        params = info.data.get("params")
        if coth is CothModel.HIGH_T_APPROX and params is not None and params.temperature_T == 0:
            raise ValueError("the high-temperature form needs T > 0; use zeroT or exact")
        return coth


def preset_config(name: str) -> Dict[str, float]:
    """Config-key values of a named preset

    Raises:
        ConfigError: for an unknown preset name
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}", field="preset")
    return dict(PRESETS[name])


def preset_values(name: str) -> Dict[str, float]:
    """SystemParams field values of a named preset"""
    return {PARAM_KEYS[key]: value for key, value in preset_config(name).items()}


def read_config_file(path: str) -> Dict[str, str]:
    """Read a flat key = value file, rejecting unknown keys

    Args:
        path: Path of the config file

    Returns:
        Dict of config keys to raw string values
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigError(f"config file not found: {path}", field="config")

    values = dotenv_values(file_path)
    for key, value in values.items():
        if key not in PARAM_KEYS and key not in RUN_KEYS:
            raise ConfigError(f"unknown config key {key!r} in {path}", field=key)
        if value is None or value == "":
            raise ConfigError(f"config key {key!r} has no value", field=key)
    logger.info(f"Read {len(values)} key(s) from {path}")
    return dict(values)


def default_run_values() -> Dict[str, Any]:
    """Run settings before any preset, file or flag is applied"""
    return {
        "coth": None,
        "tol": DEFAULT_TOL,
        "branch_policy": BranchPolicy.LOWEST_QS_STABLE.value,
        "output": None,
        "workers": os.environ.get("OPTOSQUEEZE_WORKERS", "1"),
        "bath_cutoff_factor": DEFAULT_BATH_CUTOFF_FACTOR,
    }


def parse_config(
    flags: Optional[Dict[str, Any]] = None,
    config_file: Optional[str] = None,
    preset: Optional[str] = None,
    hz: bool = False,
) -> RunConfig:
    """Merge every configuration source into a validated RunConfig

    Args:
        flags: Config-key values given on the command line; None means unset
        config_file: Optional path of a key = value file
        preset: Optional preset name
        hz: Treat frequency flags as Hz and convert them to rad/s

    Returns:
        RunConfig

    Raises:
        ConfigError: naming the offending key or field
    """
    merged: Dict[str, Any] = default_run_values()
    if preset:
        merged.update(preset_config(preset))
    if config_file:
        merged.update(read_config_file(config_file))

    for key, value in (flags or {}).items():
        if value is None:
            continue
        if key not in PARAM_KEYS and key not in RUN_KEYS:
            raise ConfigError(f"unknown config key {key!r}", field=key)
        if hz and key in FREQUENCY_KEYS:
            value = hz_to_rad_s(float(value))
        merged[key] = value

    params = build_params({PARAM_KEYS[k]: v for k, v in merged.items() if k in PARAM_KEYS})
    run = {k: v for k, v in merged.items() if k in RUN_KEYS}
    try:
        config = RunConfig(params=params, **run)
    except ValidationError as e:
        raise config_error(e) from e

    logger.info(
        f"Configuration: preset={preset} file={config_file} coth={config.coth} tol={config.tol:g} "
        f"policy={config.branch_policy.value} workers={config.workers}"
    )
    return config


def hz_to_rad_s(value: float) -> float:
    """Convert a frequency in Hz to an angular frequency in rad/s"""
    return TWO_PI * value

