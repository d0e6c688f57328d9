"""
Spectral coefficients and interaction-picture variances of the mirror.

Variances are normalised so that the mechanical ground state has
<dQ^2> = <dP^2> = 1 ([Q, P] = 2i):

    <dQ~^2> = 1/(2 pi) Int omega_m^2 (A + B + C) d omega
    <dP~^2> = 1/(2 pi) Int [omega^2 A + omega (omega - 2 omega_m) B + omega (omega + 2 omega_m) C] d omega

The integrals run over a symmetric window [-W, W] with forced panel
boundaries at the resonances; the part beyond W is added from the leading
large-omega asymptotics of A, B and C, and W is doubled until the corrected
totals settle.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np
from scipy.integrate import quad, quad_vec

from optosqueeze.errors import ConfigError, TailNotConverged, UnstableBranch
from optosqueeze.model.constants import HBAR, K_B
from optosqueeze.model.params import DerivedParams
from optosqueeze.model.stability import build_drift_matrix, eigenfrequencies
from optosqueeze.model.steadystate import SteadyBranch

logger = logging.getLogger("optosqueeze.spectrum")

DEFAULT_TOL = 1e-7
TOL_RANGE = (1e-10, 1e-3)

# frequency window cap and bath zero-point cutoff, in units of omega_m
DEFAULT_BATH_CUTOFF_FACTOR = 2.0 ** 10

# below this |hbar omega / 2 k_B T| the exact coth uses its series
_SERIES_THRESHOLD = 1e-6
_PILOT_TOL = 1e-3

# beyond this omega / theta the exact coth - 1 underflows; its tail integrals vanish
_UNDERFLOW_RATIO = 350.0


class CothModel(str, Enum):
    """Treatment of 1 + coth(hbar omega / 2 k_B T) in the thermal force spectrum"""

    EXACT = "exact"
    HIGH_T_APPROX = "hiT"
    ZERO_T = "zeroT"

    @classmethod
    def _missing_(cls, value):
        aliases = {"high_T_approx": cls.HIGH_T_APPROX, "zero_T": cls.ZERO_T}
        return aliases.get(value)

    @classmethod
    def for_temperature(cls, temperature: float) -> "CothModel":
        """Default model: high-temperature form for T > 0, zero-temperature form at T = 0"""
        return cls.HIGH_T_APPROX if temperature > 0 else cls.ZERO_T

    def factor(self, omega, temperature: float):
        """1 + coth(hbar omega / 2 k_B T) under this model"""
        omega = np.asarray(omega, dtype=float)
        if self is CothModel.HIGH_T_APPROX:
            return 1.0 + _theta(temperature) / omega
        if self is CothModel.ZERO_T or temperature == 0:
            return np.where(omega > 0, 2.0, np.where(omega < 0, 0.0, 1.0))
        return 1.0 + 1.0 / np.tanh(omega / _theta(temperature))


def _theta(temperature: float) -> float:
    """2 k_B T / hbar [rad/s]"""
    return 2.0 * K_B * temperature / HBAR


def thermal_weight(model: CothModel, omega, temperature: float):
    """omega * [1 + coth(hbar omega / 2 k_B T)], finite at omega = 0

    Accepts a scalar or an array of angular frequencies.
    """
    theta = _theta(temperature)
    if model is CothModel.HIGH_T_APPROX:
        return omega + theta
    if model is CothModel.ZERO_T or temperature == 0:
        return omega + abs(omega)

    if np.ndim(omega) == 0:
        x = omega / theta
        if abs(x) < _SERIES_THRESHOLD:
            return omega + theta * (1.0 + x * x / 3.0)
        return omega + omega / math.tanh(x)

    omega = np.asarray(omega, dtype=float)
    x = omega / theta
    small = np.abs(x) < _SERIES_THRESHOLD
    x_safe = np.where(small, 1.0, x)
    return omega + np.where(small, theta * (1.0 + x * x / 3.0), omega / np.tanh(x_safe))


def mechanical_susceptibility(omega_m: float, gamma_m: float, omega):
    """Brownian response omega_m / (omega_m^2 - omega^2 - i gamma_m omega) of the uncoupled mirror"""
    return omega_m / (omega_m ** 2 - omega ** 2 - 1j * gamma_m * omega)


def d_of_omega(d: DerivedParams, b: SteadyBranch, omega):
    """d(omega) = -4 omega_m Delta g^2 |c_s|^2 + (omega_m^2 - omega^2 - i gamma_m omega)[(kappa - i omega)^2 + Delta^2]"""
    coupling = 4.0 * d.omega_m * b.Delta * d.g ** 2 * b.photon_number
    mechanical = d.omega_m ** 2 - omega * omega - 1j * d.gamma_m * omega
    optical = (d.kappa - 1j * omega) ** 2 + b.Delta ** 2
    return mechanical * optical - coupling


def _coefficient_A(d: DerivedParams, b: SteadyBranch, omega, coth: CothModel, d_plus):
    kappa, delta = d.kappa, b.Delta
    radiation = 8.0 * kappa * d.g ** 2 * b.photon_number * (
        (d.N + 1.0) * (kappa ** 2 + (delta + omega) ** 2)
        + d.N * (kappa ** 2 + (delta - omega) ** 2)
    )
    spread = (delta ** 2 + kappa ** 2 - omega * omega) ** 2 + 4.0 * kappa ** 2 * omega * omega
    thermal = 2.0 * d.gamma_m / d.omega_m * spread * thermal_weight(coth, omega, d.temperature)
    return (radiation + thermal) / (d_plus * d_of_omega(d, b, -omega))


def _coefficient_B(d: DerivedParams, b: SteadyBranch, omega, d_plus):
    if d.M == 0:
        return 0j * omega
    kappa, delta = d.kappa, b.Delta
    c_conj = b.c_s.conjugate()
    bracket = (kappa - 1j * (delta + omega)) * (kappa - 1j * (delta + 2.0 * d.omega_m - omega))
    return 8.0 * kappa * d.g ** 2 * c_conj * c_conj * d.M * bracket / (
        d_plus * d_of_omega(d, b, 2.0 * d.omega_m - omega)
    )


def _coefficient_C(d: DerivedParams, b: SteadyBranch, omega, d_plus):
    if d.M == 0:
        return 0j * omega
    kappa, delta = d.kappa, b.Delta
    c = b.c_s
    bracket = (kappa + 1j * (delta - omega)) * (kappa + 1j * (delta + 2.0 * d.omega_m + omega))
    return 8.0 * kappa * d.g ** 2 * c * c * d.M.conjugate() * bracket / (
        d_plus * d_of_omega(d, b, -2.0 * d.omega_m - omega)
    )


def coefficient_A(d: DerivedParams, b: SteadyBranch, omega, coth: CothModel):
    """Radiation-pressure (N, N+1 weighted) plus thermal term over d(omega) d(-omega)"""
    return _coefficient_A(d, b, omega, CothModel(coth), d_of_omega(d, b, omega))


def coefficient_B(d: DerivedParams, b: SteadyBranch, omega):
    """Squeezing correlation term proportional to c_s*^2 M"""
    return _coefficient_B(d, b, omega, d_of_omega(d, b, omega))


def coefficient_C(d: DerivedParams, b: SteadyBranch, omega):
    """Squeezing correlation term proportional to c_s^2 M*"""
    return _coefficient_C(d, b, omega, d_of_omega(d, b, omega))


def spectral_density(d: DerivedParams, b: SteadyBranch, omega, coth: CothModel):
    """Integrands of the position and momentum variances

    Args:
        d: Derived parameters
        b: Steady branch
        omega: Scalar or array of angular frequencies [rad/s]
        coth: Thermal model

    Returns:
        Tuple (S_Q, S_P) of complex values
    """
    coth = CothModel(coth)
    d_plus = d_of_omega(d, b, omega)
    A = _coefficient_A(d, b, omega, coth, d_plus)
    B = _coefficient_B(d, b, omega, d_plus)
    C = _coefficient_C(d, b, omega, d_plus)
    S_Q = d.omega_m ** 2 * (A + B + C)
    S_P = omega * omega * A + omega * (omega - 2.0 * d.omega_m) * B + omega * (omega + 2.0 * d.omega_m) * C
    return S_Q, S_P


def free_mirror_variance(omega_m: float, T: float) -> float:
    """Thermal variance 1 + 2/(exp(hbar omega_m / k_B T) - 1) of the uncoupled mirror"""
    if T < 0:
        raise ValueError(f"temperature must be >= 0, got {T}")
    if T == 0:
        return 1.0
    x = HBAR * omega_m / (K_B * T)
    if x > 700.0:
        return 1.0
    return 1.0 + 2.0 / math.expm1(x)


@dataclass(frozen=True)
class VarianceResult:
    """Interaction-picture variances with their numerical diagnostics"""

    varQ: float
    varP: float
    imag_residual_Q: float
    imag_residual_P: float
    quad_error_Q: float
    quad_error_P: float
    omega_max: float
    coth: str = CothModel.HIGH_T_APPROX.value
    free_mirror: float = 1.0

    @property
    def uncertainty_product(self) -> float:
        return self.varQ * self.varP

    @property
    def squeezed_P(self) -> bool:
        return self.varP < 1.0

    @property
    def squeezed_Q(self) -> bool:
        return self.varQ < 1.0

    @property
    def squeezing_percent(self) -> float:
        """Momentum noise reduction below the ground-state level, in percent"""
        return max(0.0, 100.0 * (1.0 - self.varP))

    @property
    def suppression_factor(self) -> float:
        """Free-mirror thermal variance divided by varP"""
        return self.free_mirror / self.varP

    def to_dict(self) -> Dict[str, Any]:
        return {
            "varQ": self.varQ,
            "varP": self.varP,
            "imag_residual_Q": self.imag_residual_Q,
            "imag_residual_P": self.imag_residual_P,
            "quad_error_Q": self.quad_error_Q,
            "quad_error_P": self.quad_error_P,
            "omega_max": self.omega_max,
            "coth": self.coth,
            "uncertainty_product": self.uncertainty_product,
            "squeezed_P": self.squeezed_P,
            "squeezed_Q": self.squeezed_Q,
            "squeezing_percent": self.squeezing_percent,
            "free_mirror": self.free_mirror,
            "suppression_factor": self.suppression_factor,
        }


def _coth_minus_one(y: float) -> float:
    """coth(y) - 1 for y > 0 without overflow"""
    return 2.0 * math.exp(-2.0 * y) / (-math.expm1(-2.0 * y))


def tail_estimate(
    d: DerivedParams,
    b: SteadyBranch,
    coth: CothModel,
    window: float,
    bath_cutoff: float,
) -> Tuple[float, float]:
    """Leading-order contribution of |omega| > window to both variances

    The zero-point part of the exact and zero-T bath spectra makes the
    momentum integrand fall off as 1/|omega|; it is counted up to bath_cutoff.

    Returns:
        Tuple (tail_Q, tail_P)
    """
    W = window
    c0 = 2.0 * d.gamma_m / d.omega_m
    radiation = 8.0 * d.kappa * d.g ** 2 * (
        b.photon_number * (2.0 * d.N + 1.0) + 2.0 * (b.c_s.conjugate() ** 2 * d.M).real
    )
    log_part = math.log(bath_cutoff / W) if bath_cutoff > W else 0.0

    if coth is CothModel.HIGH_T_APPROX:
        theta = _theta(d.temperature)
        j_Q = theta / (3.0 * W ** 3)
        j_P = theta / W
    elif coth is CothModel.ZERO_T or d.temperature == 0:
        j_Q = 1.0 / (2.0 * W ** 2)
        j_P = log_part
    else:
        theta = _theta(d.temperature)
        thermal_Q = thermal_P = 0.0
        if W / theta < _UNDERFLOW_RATIO:
            thermal_Q = quad(lambda w: _coth_minus_one(w / theta) / w ** 3, W, np.inf, limit=200)[0]
            thermal_P = quad(lambda w: _coth_minus_one(w / theta) / w, W, np.inf, limit=200)[0]
        j_Q = 1.0 / (2.0 * W ** 2) + thermal_Q
        j_P = log_part + thermal_P

    tail_Q = (d.omega_m ** 2 * c0 * j_Q + d.omega_m ** 2 * radiation / (5.0 * W ** 5)) / math.pi
    tail_P = (c0 * j_P + radiation / (3.0 * W ** 3)) / math.pi
    return tail_Q, tail_P


def panel_boundaries(d: DerivedParams, b: SteadyBranch) -> np.ndarray:
    """Non-negative frequencies where the integrands peak or change character"""
    modes = eigenfrequencies(build_drift_matrix(d, b))
    two_wm = 2.0 * d.omega_m
    candidates = np.concatenate((
        [0.0, d.omega_m, abs(b.Delta), two_wm],
        modes,
        np.abs(two_wm - modes),
        two_wm + modes,
    ))
    candidates = np.sort(candidates)
    keep = np.concatenate(([True], np.diff(candidates) > 1e-9 * d.omega_m))
    return candidates[keep]


def _integrate(integrand, lo: float, hi: float, points, epsabs: float, epsrel: float):
    inner = [p for p in points if lo < p < hi]
    result, error = quad_vec(
        integrand,
        lo,
        hi,
        epsabs=epsabs,
        epsrel=epsrel,
        norm="max",
        points=inner or None,
    )
    return np.asarray(result), float(error)


def variance_QP(
    d: DerivedParams,
    b: SteadyBranch,
    coth: Optional[CothModel] = None,
    tol: float = DEFAULT_TOL,
    bath_cutoff_factor: float = DEFAULT_BATH_CUTOFF_FACTOR,
) -> VarianceResult:
    """Interaction-picture variances of position and momentum

    Args:
        d: Derived parameters
        b: Stable steady branch
        coth: Thermal model, default chosen from the temperature
        tol: Relative tolerance in [1e-10, 1e-3]
        bath_cutoff_factor: Window cap and bath zero-point cutoff in units of omega_m

    Returns:
        VarianceResult

    Raises:
        UnstableBranch: if the branch violates the stability conditions
        ConfigError: for the high-temperature form at T = 0
        TailNotConverged: if the window reaches its cap before the tail settles
    """
    if not b.stable:
        raise UnstableBranch(f"variances diverge on the unstable branch with Delta={b.Delta:.6g}")
    if not TOL_RANGE[0] <= tol <= TOL_RANGE[1]:
        raise ValueError(f"tol must lie in {TOL_RANGE}, got {tol}")
    coth = CothModel.for_temperature(d.temperature) if coth is None else CothModel(coth)
    if coth is CothModel.HIGH_T_APPROX and d.temperature == 0:
        raise ConfigError("the high-temperature form needs T > 0; use zeroT or exact", field="coth")

    cap = bath_cutoff_factor * d.omega_m
    boundaries = panel_boundaries(d, b)
    window = max(d.omega_m + 50.0 * d.kappa, 2.0 * float(boundaries[-1]))
    if window > cap:
        raise TailNotConverged(f"initial window {window:.3e} exceeds the cap {cap:.3e}")
    points = sorted(set(np.concatenate((-boundaries, boundaries)).tolist()))

    def integrand(omega):
        omega = float(omega)
        S_Q, S_P = spectral_density(d, b, omega, coth)
        return np.array([S_Q.real, S_Q.imag, S_P.real, S_P.imag])

    def corrected(inner, W):
        tail_Q, tail_P = tail_estimate(d, b, coth, W, cap)
        return inner[0] / (2.0 * math.pi) + tail_Q, inner[2] / (2.0 * math.pi) + tail_P

    pilot, _ = _integrate(integrand, -window, window, points, 0.0, _PILOT_TOL)
    scale = min(abs(v) for v in corrected(pilot, window))
    epsabs = 0.25 * tol * scale * 2.0 * math.pi

    inner, error = _integrate(integrand, -window, window, points, epsabs, 0.0)
    total_Q, total_P = corrected(inner, window)
    change_Q = change_P = math.inf

    while change_Q > tol * abs(total_Q) or change_P > tol * abs(total_P):
        if 2.0 * window > cap:
            raise TailNotConverged(
                f"tail did not settle below tol={tol:g} before the window cap {cap:.3e} rad/s "
                f"(last changes {change_Q:.3e}, {change_P:.3e})"
            )
        upper, err_up = _integrate(integrand, window, 2.0 * window, points, 0.5 * epsabs, 0.0)
        lower, err_lo = _integrate(integrand, -2.0 * window, -window, points, 0.5 * epsabs, 0.0)
        inner = inner + upper + lower
        error += err_up + err_lo
        window *= 2.0
        new_Q, new_P = corrected(inner, window)
        change_Q, change_P = abs(new_Q - total_Q), abs(new_P - total_P)
        total_Q, total_P = new_Q, new_P
        logger.debug(f"Window {window:.3e} rad/s: varQ={total_Q:.12g} varP={total_P:.12g}")

    quad_error = error / (2.0 * math.pi)
    result = VarianceResult(
        varQ=float(total_Q),
        varP=float(total_P),
        imag_residual_Q=float(inner[1] / (2.0 * math.pi)),
        imag_residual_P=float(inner[3] / (2.0 * math.pi)),
        quad_error_Q=quad_error + change_Q,
        quad_error_P=quad_error + change_P,
        omega_max=window,
        coth=coth.value,
        free_mirror=free_mirror_variance(d.omega_m, d.temperature),
    )
    for name, residual, value in (
        ("Q", result.imag_residual_Q, result.varQ),
        ("P", result.imag_residual_P, result.varP),
    ):
        if abs(residual) > 1e-6 * abs(value):
            logger.warning(f"Imaginary residual of var{name} is {residual:.3e} (value {value:.6g})")
    return result
