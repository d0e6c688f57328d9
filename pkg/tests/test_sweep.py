#!/usr/bin/env python3
"""
Tests for sweeps, minimum refinement and the stability map
"""

import math
import sys
import time
import unittest
from pathlib import Path

import numpy as np

# Ensure the src directory is in the path
src_dir = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_dir))

from optosqueeze.config import preset_values
from optosqueeze.errors import ConfigError, NoStableBranch
from optosqueeze.model import derive_params, select_branch, solve_steady_state, variance_QP
from optosqueeze.model.params import build_params
from optosqueeze.model.spectrum import CothModel, free_mirror_variance
from optosqueeze.reproduce import UNCERTAINTY_FLOOR
from optosqueeze.sweep import (
    SWEEP_COLUMNS,
    Observable,
    SweepAxis,
    build_sweep_spec,
    delta0_grid,
    find_min_variance,
    refine_minimum,
    run_stability_map,
    run_sweep,
)

OMEGA_M = 2 * np.pi * 947e3


def params(**overrides):
    values = preset_values("groeblacher")
    values.update(overrides)
    return build_params(values)


class TestRefineMinimum(unittest.TestCase):
    """Golden-section refinement on analytic objectives"""

    def test_interior_minimum(self):
        grid = tuple(np.linspace(0.0, 4.0, 41))
        spec = build_sweep_spec(axis="Delta0", grid=grid, fixed=params())
        result = find_min_variance(spec, evaluate=lambda x: (x - 1.2345) ** 2 + 0.5)
        self.assertTrue(result.refined)
        self.assertLess(abs(result.coordinate - 1.2345), 2e-4)
        self.assertAlmostEqual(result.value, 0.5, places=7)
        self.assertAlmostEqual(result.coarse_coordinate, 1.2, places=12)
        self.assertLessEqual(result.value, result.coarse_value)
        self.assertIsNone(result.min_uncertainty_product)

    def test_edge_minimum(self):
        grid = tuple(np.linspace(1.0, 2.0, 11))
        values = [x for x in grid]
        x, value, _ = refine_minimum(lambda x: x, grid, values)
        self.assertGreaterEqual(x, 1.0)
        self.assertLessEqual(x, 1.1)
        self.assertLessEqual(value, 1.0 + 1e-3)

    def test_never_worse_than_grid(self):
        grid = (0.0, 1.0, 2.0)
        values = [1.0, 0.0, 1.0]
        # objective disagrees with the tabulated values away from the nodes
        x, value, _ = refine_minimum(lambda x: 0.0 if x == 1.0 else 5.0, grid, values)
        self.assertLessEqual(value, 0.0)

    def test_undefined_neighbours(self):
        grid = tuple(np.linspace(0.0, 1.0, 5))
        values = [math.inf, math.inf, 0.3, math.inf, math.inf]
        x, value, _ = refine_minimum(lambda x: 0.3 if x == 0.5 else math.inf, grid, values)
        self.assertEqual((x, value), (0.5, 0.3))

    def test_no_defined_point(self):
        spec = build_sweep_spec(axis="Delta0", grid=(1.0, 2.0, 3.0), fixed=params())
        with self.assertRaises(NoStableBranch):
            find_min_variance(spec, evaluate=lambda x: None)


class TestSweepSpec(unittest.TestCase):
    """Validation of sweep grids"""

    def test_non_increasing_grid(self):
        with self.assertRaises(ConfigError) as ctx:
            build_sweep_spec(axis="Delta0", grid=(2.0, 1.0), fixed=params())
        self.assertEqual(ctx.exception.field, "grid")

    def test_single_point_grid(self):
        with self.assertRaises(ConfigError):
            build_sweep_spec(axis="Delta0", grid=(2.0,), fixed=params())

    def test_all_policy_rejected(self):
        with self.assertRaises(ConfigError) as ctx:
            build_sweep_spec(axis="Delta0", grid=(1.0, 2.0), fixed=params(), branch_policy="all")
        self.assertEqual(ctx.exception.field, "branch_policy")

    def test_high_temperature_form_needs_heat(self):
        with self.assertRaises(ConfigError) as ctx:
            build_sweep_spec(axis="T", grid=(0.0, 1e-3), fixed=params(), coth="hiT")
        self.assertEqual(ctx.exception.field, "coth")
        with self.assertRaises(ConfigError):
            build_sweep_spec(axis="Delta0", grid=(1.0, 2.0), fixed=params(temperature_T=0.0), coth="hiT")
        spec = build_sweep_spec(axis="T", grid=(1e-3, 1e-2), fixed=params(temperature_T=0.0), coth="hiT")
        self.assertEqual(spec.coth, CothModel.HIGH_T_APPROX)

    def test_invalid_grid_end(self):
        with self.assertRaises(ConfigError):
            build_sweep_spec(axis="T", grid=(-1e-3, 1e-3), fixed=params())

    def test_params_at(self):
        spec = build_sweep_spec(axis="r", grid=(0.0, 1.0), fixed=params())
        self.assertEqual(spec.params_at(0.7).squeeze_r, 0.7)
        self.assertEqual(spec.params_at(0.7).mass_m, 145e-12)
        self.assertEqual(SweepAxis("P").field, "laser_power_P")

    def test_default_delta0_grid(self):
        grid = delta0_grid(OMEGA_M)
        self.assertEqual(len(grid), 400)
        self.assertAlmostEqual(grid[0], 0.1 * OMEGA_M, delta=1e-6)
        self.assertAlmostEqual(grid[-1], 3.0 * OMEGA_M, delta=1e-6)


class TestRunSweep(unittest.TestCase):
    """Sweeps through the full physics pipeline"""

    def test_rows_follow_grid(self):
        grid = tuple(x * OMEGA_M for x in (1.0, 1.05, 1.1))
        spec = build_sweep_spec(axis="Delta0", grid=grid, fixed=params(squeeze_r=1.0), tol=1e-6)
        records = run_sweep(spec)
        self.assertEqual([r.coordinate for r in records], list(grid))
        for record in records:
            self.assertTrue(record.stable)
            self.assertGreaterEqual(record.variance.uncertainty_product, 1.0 - 1e-6)
            self.assertEqual(list(record.to_dict()), SWEEP_COLUMNS)
        self.assertLess(records[1].varP, 1.0)

    def test_workers_deterministic(self):
        grid = tuple(x * OMEGA_M for x in (1.0, 1.2))
        spec = build_sweep_spec(axis="Delta0", grid=grid, fixed=params(squeeze_r=1.0), tol=1e-6)
        serial = [r.to_dict() for r in run_sweep(spec, workers=1)]
        parallel = [r.to_dict() for r in run_sweep(spec, workers=2)]
        self.assertEqual(serial, parallel)

    def test_blue_detuning_flagged(self):
        grid = (-1.5 * OMEGA_M, -1.0 * OMEGA_M)
        spec = build_sweep_spec(axis="Delta0", grid=grid, fixed=params())
        records = run_sweep(spec)
        self.assertEqual(len(records), 2)
        for record in records:
            self.assertFalse(record.stable)
            self.assertIsNone(record.varP)
            self.assertIsNone(record.value(Observable.VAR_Q))
            self.assertTrue(record.note)

    def test_invalid_workers(self):
        spec = build_sweep_spec(axis="Delta0", grid=(OMEGA_M, 1.1 * OMEGA_M), fixed=params())
        with self.assertRaises(ValueError):
            run_sweep(spec, workers=0)


class TestStabilityMap(unittest.TestCase):
    """Branch counts over (Delta0, P)"""

    def test_multistable_region(self):
        rows = run_stability_map(params(), [OMEGA_M, 3 * OMEGA_M], [1e-3, 0.1])
        self.assertEqual(len(rows), 4)
        # power varies fastest
        self.assertEqual([(r.delta0, r.power) for r in rows][:2], [(OMEGA_M, 1e-3), (OMEGA_M, 0.1)])
        by_point = {(round(r.delta0 / OMEGA_M), r.power): r for r in rows}
        self.assertEqual(by_point[(3, 0.1)].branch_count, 3)
        self.assertEqual(by_point[(1, 1e-3)].branch_count, 1)
        self.assertTrue(by_point[(1, 1e-3)].lowest_stable)
        for row in rows:
            self.assertLessEqual(row.stable_count, row.branch_count)


class TestMinimumTrends(unittest.TestCase):
    """Refined minima of varP across temperature, power and squeezing on a coarse detuning grid"""

    POWERS = (0.6e-3, 3.8e-3, 6.9e-3)
    TEMPERATURES = (0.0, 1e-3, 1e-2)
    SQUEEZING = (0.0, 0.5, 1.0, 1.5, 2.0)

    @classmethod
    def setUpClass(cls):
        cls.minima = {}
        cases = {(1.0, p, t) for p in cls.POWERS for t in cls.TEMPERATURES}
        cases |= {(r, 6.9e-3, 1e-3) for r in cls.SQUEEZING}
        grid = delta0_grid(OMEGA_M, 0.4 * OMEGA_M, 2.0 * OMEGA_M, 17)
        for r, power, temperature in sorted(cases):
            spec = build_sweep_spec(
                axis="Delta0",
                grid=grid,
                fixed=params(squeeze_r=r, laser_power_P=power, temperature_T=temperature),
                tol=1e-6,
            )
            cls.minima[(r, power, temperature)] = find_min_variance(spec, Observable.VAR_P)

    def value(self, r=1.0, power=6.9e-3, temperature=1e-3):
        return self.minima[(r, power, temperature)].value

    def test_warmer_is_worse(self):
        for power in self.POWERS:
            with self.subTest(power=power):
                cold, mid, warm = (self.value(power=power, temperature=t) for t in self.TEMPERATURES)
                self.assertLess(cold, mid)
                self.assertLess(mid, warm)

    def test_more_power_helps_at_10mK(self):
        low, mid, high = (self.value(power=p, temperature=1e-2) for p in self.POWERS)
        self.assertLess(high, mid)
        self.assertLess(mid, low)

    def test_best_squeezing_near_r_one(self):
        best = self.value(r=1.0)
        for r in self.SQUEEZING:
            if r != 1.0:
                with self.subTest(r=r):
                    self.assertLess(best, self.value(r=r))

    def test_suppression_against_free_mirror(self):
        self.assertGreater(free_mirror_variance(OMEGA_M, 1e-3) / self.value(r=1.0), 100.0)

    def test_no_squeezing_stays_above_vacuum(self):
        self.assertGreaterEqual(self.value(r=0.0), 1.0)

    def test_uncertainty_bound_everywhere(self):
        for key, minimum in self.minima.items():
            with self.subTest(case=key):
                self.assertIsNotNone(minimum.min_uncertainty_product)
                self.assertGreaterEqual(minimum.min_uncertainty_product, UNCERTAINTY_FLOOR)


class TestThroughput(unittest.TestCase):
    """Wall-clock budgets for a single variance and a full detuning sweep"""

    def test_single_variance(self):
        d = derive_params(params(squeeze_r=1.0))
        branch = select_branch(solve_steady_state(d, d.delta0))
        elapsed = []
        for _ in range(3):
            start = time.perf_counter()
            variance_QP(d, branch, tol=1e-7)
            elapsed.append(time.perf_counter() - start)
        self.assertLess(min(elapsed), 0.1)

    def test_full_sweep(self):
        spec = build_sweep_spec(axis="Delta0", grid=delta0_grid(OMEGA_M), fixed=params(squeeze_r=1.0), tol=1e-6)
        start = time.perf_counter()
        records = run_sweep(spec)
        self.assertLess(time.perf_counter() - start, 30.0)
        self.assertEqual(len(records), 400)


if __name__ == "__main__":
    unittest.main()
