"""
Linear stability of a steady state.

The fluctuation vector is (dQ, dP, dx, dy). Its drift matrix has the
characteristic polynomial

    [(s + kappa)^2 + Delta^2] (s^2 + gamma_m s + omega_m^2) - 4 omega_m Delta g^2 |c_s|^2

and the two Routh-Hurwitz conditions below are its fourth coefficient and
half of its third Hurwitz determinant. The first two Hurwitz conditions
hold for any kappa, gamma_m > 0.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from optosqueeze.errors import EigenSolverError, NumericalError
from optosqueeze.model.params import DerivedParams

if TYPE_CHECKING:
    from optosqueeze.model.steadystate import SteadyBranch

logger = logging.getLogger("optosqueeze.stability")

# scaled margins closer than this to zero count as marginal (and unstable)
MARGINAL_BAND = 1e-10

_REALITY_TOL = 1e-14


@dataclass(frozen=True)
class DriftMatrix:
    """4x4 real drift matrix in the basis (dQ, dP, dx, dy)"""

    entries: np.ndarray

    def characteristic_polynomial(self) -> np.ndarray:
        """Monic coefficients of det(s I - A), highest power first"""
        return np.poly(self.entries).real


@dataclass(frozen=True)
class StabilityVerdict:
    """Routh-Hurwitz verdict with margins scaled by powers of omega_m"""

    stable: bool
    rh_margin_1: float
    rh_margin_2: float
    max_eig_real: Optional[float] = None
    marginal: bool = False

    def to_dict(self):
        return {
            "stable": self.stable,
            "rh_margin_1": self.rh_margin_1,
            "rh_margin_2": self.rh_margin_2,
            "max_eig_real": self.max_eig_real,
            "marginal": self.marginal,
        }


def drift_entries(d: DerivedParams, delta: float, c_s: complex) -> np.ndarray:
    """Drift matrix entries for an effective detuning and field amplitude"""
    c = complex(c_s)
    cc = c.conjugate()
    couplings = np.array([
        d.g * (c + cc),  # row 2, dx ; row 4, dQ
        -1j * d.g * (c - cc),  # row 2, dy
        1j * d.g * (c - cc),  # row 3, dQ
    ])
    scale = max(1.0, float(np.max(np.abs(couplings))))
    if np.max(np.abs(couplings.imag)) > _REALITY_TOL * scale:
        raise NumericalError(f"drift matrix couplings are not real: {couplings}")
    gx, gy, gy_neg = couplings.real

    return np.array([
        [0.0, d.omega_m, 0.0, 0.0],
        [-d.omega_m, -d.gamma_m, gx, gy],
        [gy_neg, 0.0, -d.kappa, delta],
        [gx, 0.0, -delta, -d.kappa],
    ])


def build_drift_matrix(d: DerivedParams, b: "SteadyBranch") -> DriftMatrix:
    """Drift matrix of the linearised fluctuations around a steady branch

    Args:
        d: Derived parameters
        b: Steady-state branch (uses Delta and c_s)

    Returns:
        DriftMatrix
    """
    return DriftMatrix(drift_entries(d, b.Delta, b.c_s))


def characteristic_coefficients(d: DerivedParams, delta: float, photon_number: float) -> np.ndarray:
    """Closed-form coefficients (1, a1, a2, a3, a4) of the characteristic quartic"""
    D = d.kappa ** 2 + delta ** 2
    coupling = 4.0 * d.omega_m * delta * d.g ** 2 * photon_number
    return np.array([
        1.0,
        2.0 * d.kappa + d.gamma_m,
        d.omega_m ** 2 + 2.0 * d.kappa * d.gamma_m + D,
        2.0 * d.kappa * d.omega_m ** 2 + d.gamma_m * D,
        D * d.omega_m ** 2 - coupling,
    ])


def hurwitz_margins(d: DerivedParams, delta: float, photon_number: float):
    """Both stability expressions, scaled by omega_m^6 and omega_m^3

    Returns:
        Tuple (margin_1, margin_2)
    """
    k, gm, wm = d.kappa, d.gamma_m, d.omega_m
    D = k ** 2 + delta ** 2
    g2c2 = d.g ** 2 * photon_number

    first = (
        k * gm * (D ** 2 + (2 * k * gm + gm ** 2 - 2 * wm ** 2) * D + wm ** 2 * (4 * k ** 2 + wm ** 2 + 2 * k * gm))
        + 2 * wm * delta * g2c2 * (2 * k + gm) ** 2
    )
    second = wm * D - 4 * delta * g2c2
    return first / wm ** 6, second / wm ** 3


def eigenvalue_check(m: DriftMatrix) -> float:
    """Largest real part over the four drift-matrix eigenvalues

    Raises:
        ValueError: for non-finite entries
        EigenSolverError: if the eigensolver does not converge
    """
    if not np.all(np.isfinite(m.entries)):
        raise ValueError("drift matrix has non-finite entries")
    try:
        eigenvalues = np.linalg.eigvals(m.entries)
    except np.linalg.LinAlgError as e:
        raise EigenSolverError(f"eigensolver failed: {e}") from e
    return float(np.max(eigenvalues.real))


def eigenfrequencies(m: DriftMatrix) -> np.ndarray:
    """Distinct |Im| of the drift-matrix eigenvalues (normal-mode frequencies)"""
    try:
        eigenvalues = np.linalg.eigvals(m.entries)
    except np.linalg.LinAlgError as e:
        raise EigenSolverError(f"eigensolver failed: {e}") from e
    return np.unique(np.abs(eigenvalues.imag))


def stability_verdict(
    d: DerivedParams,
    delta: float,
    c_s: complex,
    with_eigenvalues: bool = False,
) -> StabilityVerdict:
    """Routh-Hurwitz verdict for an effective detuning and field amplitude"""
    photon_number = abs(c_s) ** 2
    margin_1, margin_2 = (float(m) for m in hurwitz_margins(d, delta, photon_number))
    marginal = abs(margin_1) <= MARGINAL_BAND or abs(margin_2) <= MARGINAL_BAND
    stable = margin_1 > MARGINAL_BAND and margin_2 > MARGINAL_BAND

    max_eig_real = None
    if with_eigenvalues:
        max_eig_real = eigenvalue_check(DriftMatrix(drift_entries(d, delta, c_s)))

    if marginal:
        logger.warning(
            f"Marginal stability at Delta={delta:.6g}: margins {margin_1:.3e}, {margin_2:.3e}"
        )
    return StabilityVerdict(
        stable=stable,
        rh_margin_1=float(margin_1),
        rh_margin_2=float(margin_2),
        max_eig_real=max_eig_real,
        marginal=marginal,
    )


def routh_hurwitz(d: DerivedParams, b: "SteadyBranch", with_eigenvalues: bool = False) -> StabilityVerdict:
    """Evaluate the stability conditions for a steady branch

    Args:
        d: Derived parameters
        b: Steady-state branch
        with_eigenvalues: Also fill max_eig_real from the eigenvalue oracle

    Returns:
        StabilityVerdict
    """
    return stability_verdict(d, b.Delta, b.c_s, with_eigenvalues=with_eigenvalues)
