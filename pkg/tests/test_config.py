#!/usr/bin/env python3
"""
Unit tests for configuration merging
"""

import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

# Ensure the src directory is in the path
src_dir = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_dir))

from optosqueeze.config import PRESETS, parse_config, preset_config, preset_values, read_config_file
from optosqueeze.errors import ConfigError
from optosqueeze.model.constants import TWO_PI
from optosqueeze.model.spectrum import CothModel
from optosqueeze.model.steadystate import BranchPolicy


def write_config(directory, lines):
    path = Path(directory) / "run.conf"
    path.write_text("\n".join(lines) + "\n")
    return str(path)


class TestParseConfig(unittest.TestCase):
    """Precedence and validation of every source"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.env = patch.dict(os.environ, {}, clear=False)
        self.env.start()
        os.environ.pop("OPTOSQUEEZE_WORKERS", None)

    def tearDown(self):
        self.env.stop()
        self.tmp.cleanup()

    def test_preset(self):
        config = parse_config(preset="groeblacher")
        self.assertEqual(config.params.mass_m, 145e-12)
        self.assertEqual(config.params.laser_power_P, 6.9e-3)
        self.assertIsNone(config.coth)
        self.assertIsNone(config.output)
        self.assertEqual(config.workers, 1)
        self.assertEqual(config.branch_policy, BranchPolicy.LOWEST_QS_STABLE)

    def test_flags_override_file(self):
        path = write_config(self.tmp.name, ["power_w=1e-3", "squeeze_r = 0.5", "# comment"])
        config = parse_config({"power_w": 2e-3}, path, "groeblacher")
        self.assertEqual(config.params.laser_power_P, 2e-3)
        self.assertEqual(config.params.squeeze_r, 0.5)

    def test_file_overrides_preset(self):
        path = write_config(self.tmp.name, ["temperature_k=0.005", "tol=1e-6", "coth=exact"])
        config = parse_config(config_file=path, preset="groeblacher")
        self.assertEqual(config.params.temperature_T, 0.005)
        self.assertEqual(config.tol, 1e-6)
        self.assertEqual(config.coth, CothModel.EXACT)

    def test_file_missing_mass(self):
        lines = [f"{k}={v!r}" for k, v in PRESETS["groeblacher"].items() if k != "mass_kg"]
        path = write_config(self.tmp.name, lines)
        with self.assertRaises(ConfigError) as ctx:
            parse_config(config_file=path)
        self.assertEqual(ctx.exception.field, "mass_m")
        self.assertEqual(ctx.exception.exit_code, 2)

    def test_unknown_key_named(self):
        path = write_config(self.tmp.name, ["finesse=1000"])
        with self.assertRaises(ConfigError) as ctx:
            read_config_file(path)
        self.assertEqual(ctx.exception.field, "finesse")

    def test_empty_value_rejected(self):
        path = write_config(self.tmp.name, ["power_w="])
        with self.assertRaises(ConfigError) as ctx:
            read_config_file(path)
        self.assertEqual(ctx.exception.field, "power_w")

    def test_missing_file(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(config_file=str(Path(self.tmp.name) / "absent.conf"))
        self.assertEqual(ctx.exception.field, "config")

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config(preset="aspelmeyer")
        self.assertEqual(ctx.exception.field, "preset")
        with self.assertRaises(ConfigError):
            preset_values("aspelmeyer")
        with self.assertRaises(ConfigError) as ctx:
            preset_config("aspelmeyer")
        self.assertEqual(ctx.exception.field, "preset")

    def test_preset_config_uses_file_keys(self):
        values = preset_config("groeblacher")
        self.assertEqual(values["mass_kg"], 145e-12)
        self.assertEqual(preset_values("groeblacher")["mass_m"], values["mass_kg"])

    def test_hz_flags(self):
        config = parse_config({"detuning0_rad_s": 947e3, "power_w": 1e-3}, preset="groeblacher", hz=True)
        self.assertEqual(config.params.detuning_Delta0, TWO_PI * 947e3)
        # non-frequency keys are left alone
        self.assertEqual(config.params.laser_power_P, 1e-3)

    def test_coth_values(self):
        self.assertIsNone(parse_config({"coth": "auto"}, preset="groeblacher").coth)
        self.assertEqual(parse_config({"coth": "hiT"}, preset="groeblacher").coth, CothModel.HIGH_T_APPROX)
        self.assertEqual(parse_config({"coth": "zeroT"}, preset="groeblacher").coth, CothModel.ZERO_T)

    def test_high_temperature_form_needs_heat(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config({"coth": "hiT", "temperature_k": 0.0}, preset="groeblacher")
        self.assertEqual(ctx.exception.field, "coth")
        config = parse_config({"coth": "exact", "temperature_k": 0.0}, preset="groeblacher")
        self.assertEqual(config.coth, CothModel.EXACT)

    def test_workers_from_environment(self):
        os.environ["OPTOSQUEEZE_WORKERS"] = "3"
        self.assertEqual(parse_config(preset="groeblacher").workers, 3)
        self.assertEqual(parse_config({"workers": 2}, preset="groeblacher").workers, 2)

    def test_tol_out_of_range(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config({"tol": 0.5}, preset="groeblacher")
        self.assertEqual(ctx.exception.field, "tol")

    def test_invalid_physical_flag(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config({"power_w": -1.0}, preset="groeblacher")
        self.assertEqual(ctx.exception.field, "laser_power_P")


if __name__ == "__main__":
    unittest.main()
