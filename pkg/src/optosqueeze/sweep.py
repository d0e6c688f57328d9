#!/usr/bin/env python3
"""
Parameter sweeps, refined minima and stability maps
"""

import asyncio
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator, model_validator
from scipy.optimize import minimize_scalar

from optosqueeze.errors import NoStableBranch, NumericalError
from optosqueeze.model.params import SystemParams, build_params, config_error, derive_params
from optosqueeze.model.spectrum import (
    DEFAULT_BATH_CUTOFF_FACTOR,
    DEFAULT_TOL,
    TOL_RANGE,
    CothModel,
    VarianceResult,
    variance_QP,
)
from optosqueeze.model.steadystate import BranchPolicy, select_branch, solve_steady_state

logger = logging.getLogger("optosqueeze.sweep")

# default detuning window in units of omega_m
DEFAULT_DELTA0_WINDOW = (0.1, 3.0)
DEFAULT_SWEEP_POINTS = 400

# relative coordinate tolerance of the golden-section refinement
REFINE_XTOL = 1e-4


class SweepAxis(str, Enum):
    """Quantity varied along a sweep"""

    DELTA0 = "Delta0"
    R = "r"
    T = "T"
    P = "P"

    @property
    def field(self) -> str:
        """SystemParams field the axis overrides"""
        return {
            SweepAxis.DELTA0: "detuning_Delta0",
            SweepAxis.R: "squeeze_r",
            SweepAxis.T: "temperature_T",
            SweepAxis.P: "laser_power_P",
        }[self]


class Observable(str, Enum):
    VAR_Q = "varQ"
    VAR_P = "varP"


class SweepSpec(BaseModel):
    """A one-dimensional grid over one SystemParams field"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    axis: SweepAxis
    grid: Tuple[float, ...]
    fixed: SystemParams
    branch_policy: BranchPolicy = BranchPolicy.LOWEST_QS_STABLE
    coth: Optional[CothModel] = None
    tol: float = Field(default=DEFAULT_TOL, ge=TOL_RANGE[0], le=TOL_RANGE[1])
    bath_cutoff_factor: float = Field(default=DEFAULT_BATH_CUTOFF_FACTOR, gt=1)

    @field_validator("grid")
    @classmethod
    def check_grid(cls, grid: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(grid) < 2:
            raise ValueError(f"grid needs at least 2 points, got {len(grid)}")
        if any(not math.isfinite(x) for x in grid):
            raise ValueError("grid values must be finite")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("grid must be strictly increasing")
        return grid

    @field_validator("branch_policy")
    @classmethod
    def check_policy(cls, policy: BranchPolicy) -> BranchPolicy:
        if policy is BranchPolicy.ALL:
            raise ValueError("a sweep needs a single-branch policy, not 'all'")
        return policy

    @field_validator("coth")
    @classmethod
    def check_coth_temperature(cls, coth: Optional[CothModel], info: ValidationInfo) -> Optional[CothModel]:
        if coth is not CothModel.HIGH_T_APPROX:
            return coth
        fixed, axis, grid = info.data.get("fixed"), info.data.get("axis"), info.data.get("grid")
        if axis is SweepAxis.T and grid:
            temperatures = [grid[0], grid[-1]]
        else:
            temperatures = [fixed.temperature_T] if fixed is not None else []
        if any(t == 0 for t in temperatures):
            raise ValueError("the high-temperature form needs T > 0 at every grid point; use zeroT or exact")
        return coth

    @model_validator(mode="after")
    def check_grid_ends(self) -> "SweepSpec":
        # every field constraint is monotone, so the two ends cover the grid
        for x in (self.grid[0], self.grid[-1]):
            try:
                self.params_at(x)
            except ValidationError as e:
                raise ValueError(f"grid value {x:g} on axis {self.axis.value}: {e.errors()[0]['msg']}") from e
        return self

    def params_at(self, x: float) -> SystemParams:
        """Fixed parameters with the swept field set to x"""
        values = self.fixed.model_dump()
        values[self.axis.field] = x
        return SystemParams(**values)


def build_sweep_spec(**values: Any) -> SweepSpec:
    """Validate a SweepSpec, raising ConfigError instead of ValidationError"""
    try:
        return SweepSpec(**values)
    except ValidationError as e:
        raise config_error(e) from e


def delta0_grid(
    omega_m: float,
    lo: Optional[float] = None,
    hi: Optional[float] = None,
    points: int = DEFAULT_SWEEP_POINTS,
) -> Tuple[float, ...]:
    """Evenly spaced detuning grid, by default over [0.1, 3] omega_m"""
    lo = DEFAULT_DELTA0_WINDOW[0] * omega_m if lo is None else lo
    hi = DEFAULT_DELTA0_WINDOW[1] * omega_m if hi is None else hi
    return tuple(float(x) for x in np.linspace(lo, hi, points))


@dataclass(frozen=True)
class SweepRecord:
    """One grid point of a sweep; variances are absent when no stable branch was usable"""

    coordinate: float
    branch_Q_s: Optional[float]
    stable: bool
    varQ: Optional[float] = None
    varP: Optional[float] = None
    branch_index: Optional[int] = None
    note: Optional[str] = None
    variance: Optional[VarianceResult] = None

    def value(self, which: Observable) -> Optional[float]:
        return self.varQ if Observable(which) is Observable.VAR_Q else self.varP

    def to_dict(self) -> Dict[str, Any]:
        """Convert record to a flat row (CSV column order)"""
        return {
            "coordinate": self.coordinate,
            "Q_s": self.branch_Q_s,
            "stable": self.stable,
            "varQ": self.varQ,
            "varP": self.varP,
            "branch": self.branch_index,
            "note": self.note,
        }


SWEEP_COLUMNS = ["coordinate", "Q_s", "stable", "varQ", "varP", "branch", "note"]


def evaluate_point(spec: SweepSpec, x: float) -> SweepRecord:
    """Steady state, branch choice and variances at one grid coordinate

    Numerical failures become flagged records; the caller's sweep continues.
    """
    d = derive_params(spec.params_at(x))
    branches = solve_steady_state(d, d.delta0)
    try:
        branch = select_branch(branches, spec.branch_policy)
    except NoStableBranch as e:
        logger.warning(f"No stable branch at {spec.axis.value}={x:.6g}")
        return SweepRecord(coordinate=x, branch_Q_s=branches[0].Q_s, stable=False, note=e.message)

    try:
        result = variance_QP(d, branch, spec.coth, spec.tol, spec.bath_cutoff_factor)
    except NumericalError as e:
        logger.warning(f"Variance failed at {spec.axis.value}={x:.6g}: {e.message}")
        return SweepRecord(
            coordinate=x,
            branch_Q_s=branch.Q_s,
            stable=branch.stable,
            branch_index=branch.index,
            note=f"{type(e).__name__}: {e.message}",
        )

    return SweepRecord(
        coordinate=x,
        branch_Q_s=branch.Q_s,
        stable=True,
        varQ=result.varQ,
        varP=result.varP,
        branch_index=branch.index,
        variance=result,
    )


async def _gather_points(spec: SweepSpec, workers: int) -> List[SweepRecord]:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [loop.run_in_executor(pool, evaluate_point, spec, x) for x in spec.grid]
        return list(await asyncio.gather(*futures))


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[SweepRecord]:
    """Evaluate every grid point, in grid order

    Args:
        spec: Sweep specification
        workers: Worker processes; 1 runs in-process

    Returns:
        One SweepRecord per grid value, ordered like the grid
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    logger.info(f"Sweeping {spec.axis.value} over {len(spec.grid)} points with {workers} worker(s)")

    if workers == 1:
        records = [evaluate_point(spec, x) for x in spec.grid]
    else:
        records = asyncio.run(_gather_points(spec, workers))

    flagged = sum(1 for r in records if r.varP is None)
    logger.info(f"Sweep finished: {len(records) - flagged} evaluated, {flagged} flagged")
    return records


@dataclass(frozen=True)
class MinimumResult:
    """Refined minimum of a swept variance"""

    axis: str
    which: str
    coordinate: float
    value: float
    coarse_coordinate: float
    coarse_value: float
    refined: bool
    # smallest varQ * varP over every evaluated point; None with a replaced evaluator
    min_uncertainty_product: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "axis": self.axis,
            "which": self.which,
            "coordinate": self.coordinate,
            "value": self.value,
            "coarse_coordinate": self.coarse_coordinate,
            "coarse_value": self.coarse_value,
            "refined": self.refined,
            "min_uncertainty_product": self.min_uncertainty_product,
        }


def refine_minimum(
    objective: Callable[[float], float],
    grid: Tuple[float, ...],
    values: List[float],
    xtol: float = REFINE_XTOL,
) -> Tuple[float, float, bool]:
    """Golden-section refinement inside the grid cell around the coarse minimum

    Args:
        objective: Function to minimise; math.inf where undefined
        grid: Coarse grid
        values: Objective on the grid (math.inf where undefined)
        xtol: Relative coordinate tolerance

    Returns:
        Tuple (coordinate, value, refined)
    """
    i = int(np.argmin(values))
    x0, f0 = grid[i], values[i]
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]

    interior = 0 < i < len(grid) - 1 and values[i - 1] > f0 and values[i + 1] > f0
    try:
        if interior and math.isfinite(values[i - 1]) and math.isfinite(values[i + 1]):
            res = minimize_scalar(objective, bracket=(lo, x0, hi), method="golden", options={"xtol": xtol})
        else:
            xatol = xtol * max(abs(x0), hi - lo)
            res = minimize_scalar(objective, bounds=(lo, hi), method="bounded", options={"xatol": xatol})
    except ValueError as e:
        logger.warning(f"Refinement around {x0:.6g} failed ({e}); keeping the grid minimum")
        return x0, f0, False

    if not math.isfinite(res.fun) or res.fun > f0:
        return x0, f0, False
    return float(res.x), float(res.fun), True


def find_min_variance(
    spec: SweepSpec,
    which: Observable = Observable.VAR_P,
    workers: int = 1,
    evaluate: Optional[Callable[[float], Optional[float]]] = None,
) -> MinimumResult:
    """Coarse grid scan followed by golden-section refinement

    Args:
        spec: Sweep specification
        which: varQ or varP
        workers: Worker processes for the coarse scan
        evaluate: Replacement for the physics pipeline, mapping a coordinate
            to the observable or None where undefined

    Returns:
        MinimumResult

    Raises:
        NoStableBranch: if no grid point yields a variance
    """
    which = Observable(which)
    products: List[float] = []

    def track(record: SweepRecord) -> Optional[float]:
        if record.variance is not None:
            products.append(record.variance.uncertainty_product)
        return record.value(which)

    if evaluate is None:
        def evaluate(x: float) -> Optional[float]:
            return track(evaluate_point(spec, x))

        values = [track(r) for r in run_sweep(spec, workers)]
    else:
        values = [evaluate(x) for x in spec.grid]

    coarse = [math.inf if v is None else v for v in values]
    if all(math.isinf(v) for v in coarse):
        raise NoStableBranch(f"no stable grid point along {spec.axis.value}")

    def objective(x: float) -> float:
        v = evaluate(float(x))
        return math.inf if v is None else v

    i = int(np.argmin(coarse))
    x, value, refined = refine_minimum(objective, spec.grid, coarse)
    logger.info(
        f"Minimum of {which.value} along {spec.axis.value}: {value:.12g} at {x:.12g} "
        f"(grid {coarse[i]:.12g} at {spec.grid[i]:.12g})"
    )
    return MinimumResult(
        axis=spec.axis.value,
        which=which.value,
        coordinate=x,
        value=value,
        coarse_coordinate=spec.grid[i],
        coarse_value=coarse[i],
        refined=refined,
        min_uncertainty_product=min(products) if products else None,
    )


@dataclass(frozen=True)
class StabilityMapRow:
    """Multistability and stability at one (Delta0, P) grid point"""

    delta0: float
    power: float
    branch_count: int
    stable_count: int
    lowest_stable: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "Delta0": self.delta0,
            "P": self.power,
            "branches": self.branch_count,
            "stable_branches": self.stable_count,
            "lowest_Qs_stable": self.lowest_stable,
        }


STABILITY_MAP_COLUMNS = ["Delta0", "P", "branches", "stable_branches", "lowest_Qs_stable"]


def run_stability_map(
    fixed: SystemParams,
    delta0_values: List[float],
    power_values: List[float],
) -> List[StabilityMapRow]:
    """Steady-state branch structure over a (Delta0, P) grid, P varying fastest"""
    rows = []
    base = fixed.model_dump()
    for delta0 in delta0_values:
        for power in power_values:
            d = derive_params(build_params({**base, "detuning_Delta0": delta0, "laser_power_P": power}))
            branches = solve_steady_state(d, delta0)
            rows.append(StabilityMapRow(
                delta0=float(delta0),
                power=float(power),
                branch_count=len(branches),
                stable_count=sum(1 for b in branches if b.stable),
                lowest_stable=branches[0].stable,
            ))
    logger.info(f"Stability map: {len(rows)} points, {sum(r.branch_count > 1 for r in rows)} multistable")
    return rows
