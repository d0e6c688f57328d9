"""
Steady states of the driven cavity with a movable mirror.

The effective detuning solves the cubic

    (Delta - Delta0) (kappa^2 + Delta^2) + 2 g^2 eps^2 / omega_m = 0

which is solved in Delta (scaled by |Delta0| + kappa) rather than in Q_s.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Tuple, Union

import numpy as np

from optosqueeze.errors import NoStableBranch
from optosqueeze.model.params import DerivedParams
from optosqueeze.model.stability import StabilityVerdict, stability_verdict

logger = logging.getLogger("optosqueeze.steadystate")

# |discriminant| of the scaled cubic below which a double root is reported
DEGENERATE_DISCRIMINANT = 1e-10


class BranchPolicy(str, Enum):
    """Which steady branch downstream computations use"""

    LOWEST_QS_STABLE = "lowest-Qs-stable"
    HIGHEST_QS_STABLE = "highest-Qs-stable"
    ALL = "all"


@dataclass(frozen=True)
class SteadyBranch:
    """One real solution of the steady-state cubic"""

    Q_s: float
    Delta: float
    c_s: complex
    photon_number: float
    verdict: StabilityVerdict
    residual: float
    degenerate: bool = False
    index: int = 0

    @property
    def stable(self) -> bool:
        return self.verdict.stable

    def to_dict(self) -> Dict[str, Any]:
        """Convert branch to a JSON-friendly dictionary"""
        return {
            "index": self.index,
            "Q_s": self.Q_s,
            "Delta": self.Delta,
            "c_s_real": self.c_s.real,
            "c_s_imag": self.c_s.imag,
            "photon_number": self.photon_number,
            "stable": self.stable,
            "degenerate": self.degenerate,
            "residual": self.residual,
            "rh_margin_1": self.verdict.rh_margin_1,
            "rh_margin_2": self.verdict.rh_margin_2,
            "marginal": self.verdict.marginal,
        }


def scaled_cubic(d: DerivedParams, delta0: float) -> Tuple[float, np.ndarray]:
    """Monic cubic in x = Delta / s with s = |Delta0| + kappa

    Returns:
        Tuple (s, coefficients [1, a2, a1, a0])
    """
    s = abs(delta0) + d.kappa
    a2 = -delta0 / s
    a1 = (d.kappa / s) ** 2
    a0 = (d.drive_strength - delta0 * d.kappa ** 2) / s ** 3
    return s, np.array([1.0, a2, a1, a0])


def real_cubic_roots(a2: float, a1: float, a0: float) -> List[Tuple[float, bool]]:
    """Distinct real roots of x^3 + a2 x^2 + a1 x + a0

    Trigonometric form for three real roots, Cardano otherwise, followed by
    one Newton step on every simple root.

    Returns:
        List of (root, is_degenerate) pairs
    """
    shift = a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2 ** 3 / 27.0 - a2 * a1 / 3.0 + a0
    discriminant = -(4.0 * p ** 3 + 27.0 * q ** 2)

    if abs(discriminant) <= DEGENERATE_DISCRIMINANT:
        if abs(p) <= 1e-12:
            return [(-shift, True)]
        roots = [(3.0 * q / p - shift, False), (-1.5 * q / p - shift, True)]
    elif discriminant > 0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 1.5 * q / p * math.sqrt(-3.0 / p)
        theta = math.acos(min(1.0, max(-1.0, arg))) / 3.0
        roots = [(m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift, False) for k in range(3)]
    else:
        sq = math.sqrt(q * q / 4.0 + p ** 3 / 27.0)
        u = np.cbrt(-q / 2.0 - math.copysign(sq, q))
        t = u - p / (3.0 * u) if u != 0.0 else 0.0
        roots = [(float(t) - shift, False)]

    polished = []
    for x, degenerate in roots:
        if not degenerate:
            f = ((x + a2) * x + a1) * x + a0
            fp = (3.0 * x + 2.0 * a2) * x + a1
            if fp != 0.0:
                x -= f / fp
        polished.append((x, degenerate))
    return polished


def _branch_from_delta(d: DerivedParams, delta0: float, delta: float, degenerate: bool) -> SteadyBranch:
    photon_number = d.epsilon ** 2 / (d.kappa ** 2 + delta ** 2)
    c_s = d.epsilon / complex(d.kappa, delta)
    Q_s = 2.0 * d.g * photon_number / d.omega_m
    scale = abs(delta0) + d.kappa
    residual = abs(delta - (delta0 - 2.0 * d.g ** 2 * photon_number / d.omega_m)) / scale
    verdict = stability_verdict(d, delta, c_s)
    return SteadyBranch(
        Q_s=Q_s,
        Delta=delta,
        c_s=c_s,
        photon_number=photon_number,
        verdict=verdict,
        residual=residual,
        degenerate=degenerate,
    )


def solve_steady_state(d: DerivedParams, Delta0: float) -> List[SteadyBranch]:
    """Every real steady state, ordered by ascending Q_s

    Args:
        d: Derived parameters
        Delta0: Bare detuning omega_c - omega_L [rad/s]

    Returns:
        List of SteadyBranch (1 or 3 entries, 2 when a double root is flagged)
    """
    if d.drive_strength == 0.0:
        roots = [(Delta0, False)]
    else:
        s, (_, a2, a1, a0) = scaled_cubic(d, Delta0)
        roots = [(s * x, degenerate) for x, degenerate in real_cubic_roots(a2, a1, a0)]

    branches = [_branch_from_delta(d, Delta0, delta, degenerate) for delta, degenerate in roots]
    branches.sort(key=lambda b: (b.Q_s, -b.Delta))
    branches = [replace(b, index=i) for i, b in enumerate(branches)]

    if any(b.degenerate for b in branches):
        logger.warning(f"Double steady-state root at Delta0={Delta0:.6g} (fold of the bistability curve)")
    logger.debug(
        f"Steady state at Delta0={Delta0:.6g}: {len(branches)} branch(es), "
        f"stable={[b.stable for b in branches]}"
    )
    return branches


def select_branch(
    branches: List[SteadyBranch],
    policy: BranchPolicy = BranchPolicy.LOWEST_QS_STABLE,
) -> Union[SteadyBranch, List[SteadyBranch]]:
    """Pick the branch(es) downstream computations use

    Args:
        branches: Branches ordered by ascending Q_s
        policy: Selection policy

    Returns:
        One SteadyBranch, or the full list for BranchPolicy.ALL

    Raises:
        NoStableBranch: if the policy needs a stable branch and none exists
    """
    if not branches:
        raise ValueError("select_branch needs at least one branch")
    policy = BranchPolicy(policy)
    if policy is BranchPolicy.ALL:
        return list(branches)

    stable = [b for b in branches if b.stable]
    if not stable:
        raise NoStableBranch(
            f"none of the {len(branches)} steady-state branch(es) satisfies the stability conditions"
        )
    return stable[0] if policy is BranchPolicy.LOWEST_QS_STABLE else stable[-1]
