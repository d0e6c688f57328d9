#!/usr/bin/env python3
"""
Unit tests for the drift matrix and the Routh-Hurwitz conditions
"""

import sys
import unittest
from dataclasses import replace
from pathlib import Path

import numpy as np

# Ensure the src directory is in the path
src_dir = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_dir))

from optosqueeze.config import preset_values
from optosqueeze.errors import NoStableBranch
from optosqueeze.model.params import DerivedParams, build_params, derive_params
from optosqueeze.model.stability import (
    DriftMatrix,
    build_drift_matrix,
    characteristic_coefficients,
    drift_entries,
    eigenvalue_check,
    hurwitz_margins,
    routh_hurwitz,
    stability_verdict,
)
from optosqueeze.model.steadystate import select_branch, solve_steady_state

OMEGA_M = 2 * np.pi * 947e3


def derived(**overrides):
    values = preset_values("groeblacher")
    values.update(overrides)
    return derive_params(build_params(values))


def scaled_params(kappa, gamma_m, g):
    """Dimensionless parameter set with omega_m = 1"""
    return DerivedParams(
        omega_L=1e9, delta0=0.0, g=g, gamma_m=gamma_m, epsilon=1.0,
        N=0.0, M=0j, omega_m=1.0, kappa=kappa, temperature=0.0,
    )


class TestDriftMatrix(unittest.TestCase):
    """Entries of the linearised drift matrix"""

    def test_decoupled_block_diagonal(self):
        d = replace(derived(), g=0.0)
        b, = solve_steady_state(d, OMEGA_M)
        m = build_drift_matrix(d, b).entries
        np.testing.assert_array_equal(m[:2, 2:], np.zeros((2, 2)))
        np.testing.assert_array_equal(m[2:, :2], np.zeros((2, 2)))
        np.testing.assert_array_equal(m[:2, :2], [[0.0, d.omega_m], [-d.omega_m, -d.gamma_m]])
        np.testing.assert_array_equal(m[2:, 2:], [[-d.kappa, b.Delta], [-b.Delta, -d.kappa]])
        # underdamped mechanics: Re(lambda) = -gamma_m / 2 > -kappa
        self.assertAlmostEqual(eigenvalue_check(DriftMatrix(m)), -d.gamma_m / 2, delta=1e-6 * d.gamma_m)

    def test_real_amplitude(self):
        d = derived()
        m = drift_entries(d, 0.0, 2.5 + 0j)
        self.assertEqual(m[1, 2], 2 * d.g * 2.5)
        self.assertEqual(m[1, 3], 0.0)
        self.assertEqual(m[2, 0], 0.0)
        self.assertEqual(m[3, 0], 2 * d.g * 2.5)

    def test_experimental_entries(self):
        d = derived()
        b, = solve_steady_state(d, OMEGA_M)
        m = build_drift_matrix(d, b).entries
        c = b.c_s
        self.assertEqual(m.dtype, np.float64)
        self.assertAlmostEqual(m[1, 2], 2 * d.g * c.real, delta=1e-12 * abs(m[1, 2]))
        self.assertAlmostEqual(m[1, 3], 2 * d.g * c.imag, delta=1e-12 * abs(m[1, 3]))
        self.assertAlmostEqual(m[2, 0], -2 * d.g * c.imag, delta=1e-12 * abs(m[2, 0]))
        self.assertEqual(m[2, 3], b.Delta)
        self.assertEqual(m[3, 2], -b.Delta)

    def test_characteristic_polynomial_matches_closed_form(self):
        d = derived(squeeze_r=1.0)
        for b in solve_steady_state(d, OMEGA_M):
            from_matrix = build_drift_matrix(d, b).characteristic_polynomial()
            closed = characteristic_coefficients(d, b.Delta, b.photon_number)
            np.testing.assert_allclose(from_matrix, closed, rtol=1e-9)

    def test_non_finite_rejected(self):
        with self.assertRaises(ValueError):
            eigenvalue_check(DriftMatrix(np.full((4, 4), np.nan)))


class TestRouthHurwitz(unittest.TestCase):
    """Stability verdicts"""

    def test_passive_system_stable(self):
        d = replace(derived(), g=0.0)
        b, = solve_steady_state(d, OMEGA_M)
        verdict = routh_hurwitz(d, b, with_eigenvalues=True)
        self.assertTrue(verdict.stable)
        self.assertGreater(verdict.rh_margin_1, 0)
        self.assertGreater(verdict.rh_margin_2, 0)
        self.assertLess(verdict.max_eig_real, 0)

    def test_first_margin_is_half_third_hurwitz_determinant(self):
        d = derived(squeeze_r=1.0)
        b, = solve_steady_state(d, OMEGA_M)
        _, a1, a2, a3, a4 = characteristic_coefficients(d, b.Delta, b.photon_number)
        third = a3 * (a1 * a2 - a3) - a1 ** 2 * a4
        m1, m2 = hurwitz_margins(d, b.Delta, b.photon_number)
        self.assertAlmostEqual(m1 / (third / 2 / d.omega_m ** 6), 1.0, places=9)
        self.assertAlmostEqual(m2 / (a4 / d.omega_m ** 4), 1.0, places=12)

    def test_blue_detuning_unstable(self):
        d = derived(detuning_Delta0=-OMEGA_M)
        branches = solve_steady_state(d, -OMEGA_M)
        for b in branches:
            verdict = routh_hurwitz(d, b, with_eigenvalues=True)
            self.assertFalse(verdict.stable)
            self.assertGreater(verdict.max_eig_real, 0)
        with self.assertRaises(NoStableBranch):
            select_branch(branches)

    def test_second_condition_violated(self):
        # red detuning with 4 Delta g^2 |c|^2 > omega_m (kappa^2 + Delta^2)
        d = scaled_params(kappa=0.1, gamma_m=1e-3, g=1.0)
        delta = 1.0
        c_s = 3.0 * (d.kappa - 1j * delta) / abs(d.kappa - 1j * delta)
        verdict = stability_verdict(d, delta, c_s, with_eigenvalues=True)
        self.assertLess(verdict.rh_margin_2, 0)
        self.assertFalse(verdict.stable)
        self.assertGreater(verdict.max_eig_real, 0)

    def test_experimental_optimum_stable(self):
        for r in (0.0, 1.0, 2.0):
            d = derived(squeeze_r=r, detuning_Delta0=1.05 * OMEGA_M)
            b = select_branch(solve_steady_state(d, 1.05 * OMEGA_M))
            self.assertTrue(routh_hurwitz(d, b, with_eigenvalues=True).stable)

    def test_random_draws_match_eigenvalues(self):
        rng = np.random.default_rng(20240611)
        agree = stable_count = unstable_count = 0
        draws = 0
        while draws < 1000:
            kappa = 10 ** rng.uniform(-1.3, 0.7)
            gamma_m = 10 ** rng.uniform(-3.0, -1.0)
            coupling = 10 ** rng.uniform(-4.0, 1.0)
            delta = rng.uniform(-3.0, 3.0)
            d = scaled_params(kappa, gamma_m, np.sqrt(coupling))
            c_s = complex(d.kappa, -delta) / abs(complex(d.kappa, -delta))
            verdict = stability_verdict(d, delta, c_s, with_eigenvalues=True)
            if verdict.marginal or abs(verdict.max_eig_real) < 1e-8:
                continue
            draws += 1
            eig_stable = verdict.max_eig_real < 0
            agree += verdict.stable == eig_stable
            stable_count += eig_stable
            unstable_count += not eig_stable
        self.assertEqual(agree, 1000)
        self.assertGreater(stable_count, 10)
        self.assertGreater(unstable_count, 10)


if __name__ == "__main__":
    unittest.main()
