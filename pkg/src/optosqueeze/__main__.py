#!/usr/bin/env python3
"""
Main entry point for the optosqueeze CLI
"""

import argparse
import sys

from dotenv import load_dotenv

from optosqueeze.cli import CommandRunner, configure_logging, error_line
from optosqueeze.config import PARAM_KEYS, PRESETS, RUN_KEYS, parse_config
from optosqueeze.errors import ConfigError
from optosqueeze.model.spectrum import CothModel
from optosqueeze.model.steadystate import BranchPolicy
from optosqueeze.reproduce import BASE_PRESET
from optosqueeze.sweep import Observable, SweepAxis

# flag -> config key
PARAM_FLAGS = {
    "--wavelength": ("wavelength_m", "laser wavelength [m]"),
    "--L": ("cavity_length_m", "cavity length [m]"),
    "--mass": ("mass_kg", "effective mirror mass [kg]"),
    "--kappa": ("kappa_rad_s", "cavity decay rate [rad/s]"),
    "--omega-m": ("omega_m_rad_s", "mechanical frequency [rad/s]"),
    "--quality": ("quality", "mechanical quality factor"),
    "--P": ("power_w", "input laser power [W]"),
    "--T": ("temperature_k", "bath temperature [K]"),
    "--r": ("squeeze_r", "squeezing parameter"),
    "--phi": ("squeeze_phi", "squeezing phase [rad]"),
    "--delta0": ("detuning0_rad_s", "bare detuning omega_c - omega_L [rad/s]"),
}


def common_parser() -> argparse.ArgumentParser:
    """Flags shared by every subcommand"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--debug", action="store_true", help="Enable debug logging")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="Load a built-in parameter set")
    parser.add_argument("--config", help="Flat key = value parameter file")
    parser.add_argument("--hz", action="store_true", help="Frequency flags are given in Hz, not rad/s")

    params = parser.add_argument_group("physical parameters")
    for flag, (key, help_text) in PARAM_FLAGS.items():
        params.add_argument(flag, dest=key, type=float, help=help_text)

    run = parser.add_argument_group("numerics and output")
    run.add_argument("--coth", choices=["auto"] + [m.value for m in CothModel], help="Thermal model")
    run.add_argument("--tol", type=float, help="Relative quadrature tolerance (default 1e-7)")
    run.add_argument("--policy", dest="branch_policy", choices=[p.value for p in BranchPolicy], help="Branch policy")
    run.add_argument("--output", choices=["csv", "json"], help="Output format")
    run.add_argument("--workers", type=int, help="Worker processes (default $OPTOSQUEEZE_WORKERS or 1)")
    run.add_argument("--bath-cutoff", dest="bath_cutoff_factor", type=float,
                     help="Window cap and bath cutoff in units of omega_m (default 1024)")
    return parser


def add_grid_arguments(parser: argparse.ArgumentParser, points: int) -> None:
    parser.add_argument("--start", type=float, help="First grid value (Delta0 default 0.1 omega_m)")
    parser.add_argument("--stop", type=float, help="Last grid value (Delta0 default 3 omega_m)")
    parser.add_argument("--points", type=int, default=points, help=f"Grid points (default {points})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optosqueeze",
        description="Squeezing of a nanomechanical mirror in a cavity fed with squeezed vacuum",
    )
    common = common_parser()
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    sub.add_parser("steady", parents=[common], help="All steady-state branches")
    sub.add_parser("stability", parents=[common], help="Stability verdict per branch")

    stability_map = sub.add_parser("stability-map", parents=[common], help="Branch structure over (Delta0, P)")
    add_grid_arguments(stability_map, 60)
    stability_map.add_argument("--power-start", type=float, help="Lowest power [W]")
    stability_map.add_argument("--power-stop", type=float, help="Highest power [W]")
    stability_map.add_argument("--power-points", type=int, default=20, help="Power grid points")

    sub.add_parser("variance", parents=[common], help="Position and momentum variances")

    sweep = sub.add_parser("sweep", parents=[common], help="Variances along a grid")
    sweep.add_argument("--axis", choices=[a.value for a in SweepAxis], default=SweepAxis.DELTA0.value)
    add_grid_arguments(sweep, 400)

    minimum = sub.add_parser("min", parents=[common], help="Refined minimum along a grid")
    minimum.add_argument("--axis", choices=[a.value for a in SweepAxis], default=SweepAxis.DELTA0.value)
    minimum.add_argument("--which", choices=[o.value for o in Observable], default=Observable.VAR_P.value)
    add_grid_arguments(minimum, 96)

    reproduce = sub.add_parser("reproduce", parents=[common], help="Check published minima, on the groeblacher preset unless --preset or --config is given")
    reproduce.add_argument("--figure", choices=["2", "3", "4", "5", "all"], default="all")
    reproduce.add_argument("--points", type=int, default=96, help="Coarse detuning points per case")

    density = sub.add_parser("density", parents=[common], help="Variance integrands over frequency")
    density.add_argument("--omega-start", type=float, help="Lowest frequency (default -3 omega_m)")
    density.add_argument("--omega-stop", type=float, help="Highest frequency (default 3 omega_m)")
    density.add_argument("--points", type=int, default=601, help="Frequency points")
    return parser


def main(argv=None) -> int:
    """Parse arguments, build the run configuration and dispatch the subcommand"""
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.debug)

    options = vars(args)
    flags = {key: options.pop(key, None) for key in list(PARAM_KEYS) + list(RUN_KEYS)}
    command = options.pop("command")
    config_path, preset = options.pop("config"), options.pop("preset")
    # the published cases override the experimental set unless told otherwise
    if command == "reproduce" and config_path is None and preset is None:
        preset = BASE_PRESET
    try:
        config = parse_config(flags, config_path, preset, options["hz"])
    except ConfigError as e:
        print(error_line(e), file=sys.stderr, flush=True)
        return e.exit_code

    return CommandRunner(config).dispatch(command, options)


if __name__ == "__main__":
    sys.exit(main())
