#!/usr/bin/env python3
"""
Reproduction checks against the published detuning-sweep minima
"""

import logging
from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Any, Dict, List, Optional

from optosqueeze.config import preset_values
from optosqueeze.errors import ConfigError, NumericalError
from optosqueeze.model.params import SystemParams, build_params
from optosqueeze.model.spectrum import DEFAULT_BATH_CUTOFF_FACTOR, DEFAULT_TOL, CothModel, free_mirror_variance
from optosqueeze.model.steadystate import BranchPolicy
from optosqueeze.sweep import Observable, build_sweep_spec, delta0_grid, find_min_variance

logger = logging.getLogger("optosqueeze.reproduce")

# relative band around each published minimum
CHECK_TOLERANCE = 0.03

# coarse detuning points before golden-section refinement
REPRODUCE_POINTS = 96

# every evaluated point must respect varQ * varP >= 1 up to this slack
UNCERTAINTY_FLOOR = 1.0 - 1e-6

# parameter set the published cases override
BASE_PRESET = "groeblacher"

MILLIWATT = 1e-3
MILLIKELVIN = 1e-3


class CheckStatus(Enum):
    """Enum for check statuses"""
    PASS = auto()
    FAIL = auto()
    ERROR = auto()


@dataclass(frozen=True)
class FigureCase:
    """One curve of a figure: parameter overrides and its published minimum of varP"""

    label: str
    overrides: Dict[str, float]
    expected: float


FIGURE_CASES: Dict[int, List[FigureCase]] = {
    2: [
        FigureCase(f"r={r:g}", {"squeeze_r": r, "temperature_T": 1 * MILLIKELVIN, "laser_power_P": 6.9 * MILLIWATT}, v)
        for r, v in ((0.0, 1.071), (0.5, 0.467), (1.0, 0.319), (1.5, 0.468), (2.0, 1.078))
    ],
    3: [
        FigureCase(f"T={t:g}mK", {"squeeze_r": 1.0, "temperature_T": t * MILLIKELVIN, "laser_power_P": 0.6 * MILLIWATT}, v)
        for t, v in ((0.0, 0.252), (1.0, 0.611), (5.0, 2.082), (10.0, 3.919))
    ],
    4: [
        FigureCase(f"T={t:g}mK", {"squeeze_r": 1.0, "temperature_T": t * MILLIKELVIN, "laser_power_P": 3.8 * MILLIWATT}, v)
        for t, v in ((0.0, 0.261), (1.0, 0.330), (10.0, 0.968))
    ],
    5: [
        FigureCase(f"T={t:g}mK", {"squeeze_r": 1.0, "temperature_T": t * MILLIKELVIN, "laser_power_P": 6.9 * MILLIWATT}, v)
        for t, v in ((0.0, 0.275), (1.0, 0.319), (10.0, 0.731))
    ],
}


@dataclass
class CheckRow:
    """Outcome of one figure case"""

    figure: int
    label: str
    expected: float
    measured: Optional[float] = None
    delta0: Optional[float] = None
    status: CheckStatus = CheckStatus.ERROR
    squeezing_percent: Optional[float] = None
    suppression_factor: Optional[float] = None
    min_uncertainty_product: Optional[float] = None
    message: Optional[str] = None

    @property
    def deviation(self) -> Optional[float]:
        if self.measured is None:
            return None
        return self.measured / self.expected - 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "figure": self.figure,
            "case": self.label,
            "expected": self.expected,
            "measured": self.measured,
            "deviation": self.deviation,
            "Delta0": self.delta0,
            "status": self.status.name,
            "squeezing_percent": self.squeezing_percent,
            "suppression_factor": self.suppression_factor,
            "min_uncertainty_product": self.min_uncertainty_product,
            "message": self.message,
        }


REPRODUCE_COLUMNS = [
    "figure", "case", "expected", "measured", "deviation", "Delta0",
    "status", "squeezing_percent", "suppression_factor", "min_uncertainty_product", "message",
]


@dataclass
class FigureReport:
    figure: int
    rows: List[CheckRow] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.status is CheckStatus.PASS for row in self.rows)


def case_params(case: FigureCase, base: Optional[Dict[str, Any]] = None) -> SystemParams:
    """Base experimental parameters with a figure case applied"""
    values = dict(preset_values(BASE_PRESET) if base is None else base)
    values.update(case.overrides)
    return build_params(values)


def check_case(
    figure: int,
    case: FigureCase,
    base: Optional[Dict[str, Any]] = None,
    points: int = REPRODUCE_POINTS,
    coth: Optional[CothModel] = None,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    branch_policy: BranchPolicy = BranchPolicy.LOWEST_QS_STABLE,
    bath_cutoff_factor: float = DEFAULT_BATH_CUTOFF_FACTOR,
) -> CheckRow:
    """Locate the minimum of varP over the detuning window for one case"""
    row = CheckRow(figure=figure, label=case.label, expected=case.expected)
    params = case_params(case, base)
    spec = build_sweep_spec(
        axis="Delta0",
        grid=delta0_grid(params.omega_m, points=points),
        fixed=params,
        coth=coth,
        tol=tol,
        branch_policy=branch_policy,
        bath_cutoff_factor=bath_cutoff_factor,
    )

    try:
        minimum = find_min_variance(spec, Observable.VAR_P, workers=workers)
    except NumericalError as e:
        logger.exception(f"Figure {figure} case {case.label} failed")
        row.message = f"{type(e).__name__}: {e.message}"
        return row

    row.measured = minimum.value
    row.delta0 = minimum.coordinate
    row.squeezing_percent = max(0.0, 100.0 * (1.0 - minimum.value))
    if params.temperature_T > 0:
        row.suppression_factor = free_mirror_variance(params.omega_m, params.temperature_T) / minimum.value
    row.min_uncertainty_product = minimum.min_uncertainty_product
    row.status = CheckStatus.PASS if abs(row.deviation) <= CHECK_TOLERANCE else CheckStatus.FAIL
    product = minimum.min_uncertainty_product
    if product is not None and product < UNCERTAINTY_FLOOR:
        row.status = CheckStatus.FAIL
        row.message = f"varQ * varP = {product:.9g} below the uncertainty bound"
    logger.info(
        f"Figure {figure} {case.label}: min varP {minimum.value:.6g} at Delta0={minimum.coordinate:.6g} "
        f"(published {case.expected}, {row.status.name})"
    )
    return row


def reproduce_figure(
    figure: int,
    base: Optional[Dict[str, Any]] = None,
    points: int = REPRODUCE_POINTS,
    coth: Optional[CothModel] = None,
    tol: float = DEFAULT_TOL,
    workers: int = 1,
    branch_policy: BranchPolicy = BranchPolicy.LOWEST_QS_STABLE,
    bath_cutoff_factor: float = DEFAULT_BATH_CUTOFF_FACTOR,
) -> FigureReport:
    """Run every case of a figure and compare with its published minima

    Args:
        figure: Figure number (2, 3, 4 or 5)
        base: Parameter values the cases override, default the groeblacher preset
        points: Coarse detuning grid size
        coth: Thermal model, default chosen per temperature
        tol: Quadrature tolerance
        workers: Worker processes for each coarse scan
        branch_policy: Steady state to follow along each scan
        bath_cutoff_factor: Squeezed-bath cutoff in units of omega_m

    Returns:
        FigureReport with one row per case
    """
    if figure not in FIGURE_CASES:
        raise ConfigError(f"unknown figure {figure}; choose from {sorted(FIGURE_CASES)}", field="figure")

    report = FigureReport(figure=figure)
    for case in FIGURE_CASES[figure]:
        report.rows.append(check_case(figure, case, base, points, coth, tol, workers, branch_policy, bath_cutoff_factor))
    logger.info(f"Figure {figure}: {'PASS' if report.passed else 'FAIL'}")
    return report

