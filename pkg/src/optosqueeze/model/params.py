"""
Physical inputs of the cavity / mirror system and the symbols derived from them.

All quantities are SI, angular frequencies in rad/s.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Any, Dict

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from optosqueeze.errors import ConfigError
from optosqueeze.model.constants import ADIABATIC_FRACTION, C_LIGHT, HBAR, TWO_PI

logger = logging.getLogger("optosqueeze.params")


class SystemParams(BaseModel):
    """User-facing physical inputs, validated on construction"""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    wavelength_lambda: float = Field(gt=0, description="laser wavelength [m]")
    cavity_length_L: float = Field(gt=0, description="cavity length [m]")
    mass_m: float = Field(gt=0, description="effective mirror mass [kg]")
    kappa: float = Field(gt=0, description="cavity amplitude decay rate [rad/s]")
    omega_m: float = Field(gt=0, description="mechanical frequency [rad/s]")
    quality_Q: float = Field(gt=0, description="mechanical quality factor omega_m/gamma_m")
    laser_power_P: float = Field(gt=0, description="input laser power [W]")
    temperature_T: float = Field(ge=0, description="bath temperature [K]")
    squeeze_r: float = Field(default=0.0, ge=0, description="squeezing parameter")
    squeeze_phi: float = Field(default=0.0, description="squeezing phase [rad]")
    detuning_Delta0: float = Field(default=0.0, description="bare detuning omega_c - omega_L [rad/s]")

    @model_validator(mode="after")
    def check_adiabatic_limit(self) -> "SystemParams":
        free_spectral_range = C_LIGHT / (2.0 * self.cavity_length_L)
        if self.omega_m >= ADIABATIC_FRACTION * free_spectral_range:
            raise ValueError(
                f"omega_m: {self.omega_m:.6g} rad/s violates the adiabatic limit "
                f"omega_m < {ADIABATIC_FRACTION} * c/(2L) = {ADIABATIC_FRACTION * free_spectral_range:.6g}"
            )
        return self


def config_error(e: ValidationError) -> ConfigError:
    """Turn the first pydantic error into a ConfigError naming its field"""
    first = e.errors()[0]
    loc = first.get("loc") or ()
    field = ".".join(str(part) for part in loc) if loc else None
    message = first.get("msg", str(e))
    if field is None:
        for name in SystemParams.model_fields:
            if f"{name}:" in message:
                field = name
                break
    if first.get("type") == "missing":
        message = f"missing required parameter {field}"
    logger.error(f"Validation failed: {field} - {message}")
    return ConfigError(message, field=field)


def build_params(values: Dict[str, Any]) -> SystemParams:
    """Validate raw values into SystemParams

    Args:
        values: Mapping of SystemParams field names to values

    Returns:
        Validated SystemParams

    Raises:
        ConfigError: naming the first offending field
    """
    try:
        return SystemParams(**values)
    except ValidationError as e:
        raise config_error(e) from e


@dataclass(frozen=True)
class DerivedParams:
    """Derived symbols used by the steady-state, stability and spectrum code

    The cavity frequency is stored as the bare detuning ``delta0`` from the
    laser; ``omega_c`` rebuilds the absolute value on demand.
    """

    omega_L: float
    delta0: float
    g: float
    gamma_m: float
    epsilon: float
    N: float
    M: complex
    omega_m: float
    kappa: float
    temperature: float

    def __post_init__(self):
        if self.N < 0:
            raise ValueError(f"N must be >= 0, got {self.N}")
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")
        if self.gamma_m <= 0:
            raise ValueError(f"gamma_m must be > 0, got {self.gamma_m}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.omega_m <= 0 or self.kappa <= 0:
            raise ValueError("omega_m and kappa must be > 0")
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")

    @property
    def omega_c(self) -> float:
        return self.omega_L + self.delta0

    @property
    def drive_strength(self) -> float:
        """2 g^2 eps^2 / omega_m, the constant term of the steady-state cubic"""
        return 2.0 * self.g ** 2 * self.epsilon ** 2 / self.omega_m


def derive_params(p: SystemParams) -> DerivedParams:
    """Compute every derived symbol from validated inputs

    omega_c inside g and eps is approximated by omega_L; the detuning
    correction is of relative order 1e-9.

    Args:
        p: Validated system parameters

    Returns:
        DerivedParams
    """
    omega_L = TWO_PI * C_LIGHT / p.wavelength_lambda
    g = (omega_L / p.cavity_length_L) * math.sqrt(HBAR / (2.0 * p.mass_m * p.omega_m))
    gamma_m = p.omega_m / p.quality_Q
    epsilon = math.sqrt(2.0 * p.kappa * p.laser_power_P / (HBAR * omega_L))
    N = math.sinh(p.squeeze_r) ** 2
    M = cmath.rect(math.sinh(p.squeeze_r) * math.cosh(p.squeeze_r), p.squeeze_phi)

    return DerivedParams(
        omega_L=omega_L,
        delta0=p.detuning_Delta0,
        g=g,
        gamma_m=gamma_m,
        epsilon=epsilon,
        N=N,
        M=M,
        omega_m=p.omega_m,
        kappa=p.kappa,
        temperature=p.temperature_T,
    )
