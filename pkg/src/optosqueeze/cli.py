#!/usr/bin/env python3
"""
Command runner for the optosqueeze CLI
"""

import csv
import json
import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO

import numpy as np

from optosqueeze.config import OutputFormat, RunConfig, hz_to_rad_s
from optosqueeze.errors import ConfigError, OptoSqueezeError
from optosqueeze.model.params import derive_params
from optosqueeze.model.spectrum import CothModel, spectral_density, variance_QP
from optosqueeze.model.stability import routh_hurwitz
from optosqueeze.model.steadystate import BranchPolicy, select_branch, solve_steady_state
from optosqueeze.reproduce import FIGURE_CASES, REPRODUCE_COLUMNS, reproduce_figure
from optosqueeze.sweep import (
    STABILITY_MAP_COLUMNS,
    SWEEP_COLUMNS,
    SweepAxis,
    build_sweep_spec,
    delta0_grid,
    find_min_variance,
    run_stability_map,
    run_sweep,
)

logger = logging.getLogger("optosqueeze.cli")

# exit code when a reproduction check misses its band
EXIT_CHECK_FAILED = 1

STEADY_COLUMNS = ["Delta0", "index", "Q_s", "Delta", "c_s_real", "c_s_imag", "photon_number", "stable", "degenerate", "residual"]
STABILITY_COLUMNS = ["Delta0", "index", "Delta", "stable", "rh_margin_1", "rh_margin_2", "max_eig_real", "marginal"]
DENSITY_COLUMNS = ["omega", "S_Q_real", "S_Q_imag", "S_P_real", "S_P_imag"]


def configure_logging(debug: bool = False) -> Path:
    """Send log records to a timestamped file; stdout stays reserved for data

    Args:
        debug: Log at DEBUG instead of INFO

    Returns:
        Path of the log file
    """
    log_dir = Path(os.environ.get("OPTOSQUEEZE_LOG_DIR", "logs"))
    log_dir.mkdir(parents=True, exist_ok=True)
    log_file = log_dir / f"optosqueeze_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"

    # Configure logging to file only (no stdout)
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.FileHandler(log_file)],
        force=True,
    )
    return log_file


def format_value(value: Any) -> str:
    """CSV cell text; floats keep 12 significant digits"""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def write_csv(rows: List[Dict[str, Any]], columns: List[str], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(column)) for column in columns])


def write_json_lines(rows: List[Dict[str, Any]], stream: TextIO) -> None:
    for row in rows:
        stream.write(json.dumps(row) + "\n")


def error_line(error: OptoSqueezeError) -> str:
    return json.dumps(error.to_dict())


class CommandRunner:
    """Routes a subcommand and its run configuration to the model layer"""

    def __init__(self, config: RunConfig, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None):
        """Initialize the runner

        Args:
            config: Validated run configuration
            stdout: Stream for data output
            stderr: Stream for error lines
        """
        self.config = config
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr
        self.command_map = {
            "steady": self.handle_steady,
            "stability": self.handle_stability,
            "stability-map": self.handle_stability_map,
            "variance": self.handle_variance,
            "sweep": self.handle_sweep,
            "min": self.handle_min,
            "reproduce": self.handle_reproduce,
            "density": self.handle_density,
        }

    def _emit(self, result: Dict[str, Any]) -> None:
        output = self.config.output or OutputFormat(result.get("default_output", "csv"))
        if output is OutputFormat.JSON:
            write_json_lines(result["rows"], self.stdout)
        else:
            write_csv(result["rows"], result["columns"], self.stdout)
        self.stdout.flush()

    def dispatch(self, command: str, options: Optional[Dict[str, Any]] = None) -> int:
        """Run one subcommand and write its output

        Args:
            command: Subcommand name
            options: Subcommand-specific options

        Returns:
            Process exit code
        """
        if command not in self.command_map:
            logger.error(f"Unknown command: {command}")
            error = ConfigError(f"unknown command {command!r}", field="command")
            print(error_line(error), file=self.stderr, flush=True)
            return error.exit_code

        logger.info(f"Command: {command}")
        logger.debug(f"Options: {options}")
        try:
            result = self.command_map[command](options or {})
        except OptoSqueezeError as e:
            logger.error(f"{command} failed: {type(e).__name__}: {e.message}")
            print(error_line(e), file=self.stderr, flush=True)
            return e.exit_code
        except Exception as e:
            logger.exception(f"Error handling command: {command}")
            error = OptoSqueezeError(f"internal error: {e}")
            print(error_line(error), file=self.stderr, flush=True)
            return error.exit_code

        self._emit(result)
        exit_code = result.get("exit_code", 0)
        logger.info(f"Command finished: {command} (exit {exit_code})")
        return exit_code

    def _derived(self):
        return derive_params(self.config.params)

    def _chosen_branches(self, d) -> list:
        branches = solve_steady_state(d, d.delta0)
        chosen = select_branch(branches, self.config.branch_policy)
        if isinstance(chosen, list):
            return [b for b in chosen if b.stable] or chosen
        return [chosen]

    def _delta0_grid(self, options: Dict[str, Any], omega_m: float) -> tuple:
        start, stop = options.get("start"), options.get("stop")
        if options.get("hz"):
            start = None if start is None else hz_to_rad_s(start)
            stop = None if stop is None else hz_to_rad_s(stop)
        return delta0_grid(omega_m, start, stop, options.get("points") or 400)

    def _sweep_spec(self, options: Dict[str, Any]):
        params = self.config.params
        axis = SweepAxis(options.get("axis") or SweepAxis.DELTA0.value)
        if axis is SweepAxis.DELTA0:
            grid = self._delta0_grid(options, params.omega_m)
        else:
            if options.get("start") is None or options.get("stop") is None:
                raise ConfigError(f"--start and --stop are required for axis {axis.value}", field="start")
            grid = tuple(float(x) for x in np.linspace(options["start"], options["stop"], options.get("points") or 400))
        if self.config.branch_policy is BranchPolicy.ALL:
            raise ConfigError("sweeps need a single-branch policy, not 'all'", field="branch_policy")
        return build_sweep_spec(
            axis=axis,
            grid=grid,
            fixed=params,
            branch_policy=self.config.branch_policy,
            coth=self.config.coth,
            tol=self.config.tol,
            bath_cutoff_factor=self.config.bath_cutoff_factor,
        )

    def handle_steady(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Every steady-state branch at the configured detuning"""
        d = self._derived()
        rows = [{"Delta0": d.delta0, **b.to_dict()} for b in solve_steady_state(d, d.delta0)]
        return {"rows": rows, "columns": STEADY_COLUMNS}

    def handle_stability(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Stability verdict and eigenvalue cross-check per branch"""
        d = self._derived()
        rows = []
        for b in solve_steady_state(d, d.delta0):
            verdict = routh_hurwitz(d, b, with_eigenvalues=True)
            rows.append({"Delta0": d.delta0, "index": b.index, "Delta": b.Delta, **verdict.to_dict()})
        return {"rows": rows, "columns": STABILITY_COLUMNS, "default_output": "json"}

    def handle_stability_map(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Branch counts and stability over a (Delta0, P) grid"""
        params = self.config.params
        delta0_values = self._delta0_grid(options, params.omega_m)
        p_lo = options.get("power_start") or 0.1 * params.laser_power_P
        p_hi = options.get("power_stop") or 10.0 * params.laser_power_P
        power_values = np.linspace(p_lo, p_hi, options.get("power_points") or 20)
        rows = [row.to_dict() for row in run_stability_map(params, delta0_values, power_values)]
        return {"rows": rows, "columns": STABILITY_MAP_COLUMNS}

    def handle_variance(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Interaction-picture variances on the chosen branch(es)"""
        d = self._derived()
        rows = []
        for b in self._chosen_branches(d):
            result = variance_QP(d, b, self.config.coth, self.config.tol, self.config.bath_cutoff_factor)
            rows.append({"Delta0": d.delta0, "branch": b.index, "Q_s": b.Q_s, **result.to_dict()})
        columns = list(rows[0]) if rows else []
        return {"rows": rows, "columns": columns, "default_output": "json"}

    def handle_sweep(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Variances along a one-dimensional grid"""
        spec = self._sweep_spec(options)
        records = run_sweep(spec, self.config.workers)
        return {"rows": [r.to_dict() for r in records], "columns": SWEEP_COLUMNS}

    def handle_min(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Refined minimum of varQ or varP along a grid"""
        options = {**options, "points": options.get("points") or 96}
        spec = self._sweep_spec(options)
        minimum = find_min_variance(spec, options.get("which") or "varP", self.config.workers)
        row = minimum.to_dict()
        return {"rows": [row], "columns": list(row), "default_output": "json"}

    def handle_reproduce(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Published minima checks for one or every figure"""
        figure = options.get("figure")
        figures = sorted(FIGURE_CASES) if figure in (None, "all") else [int(figure)]
        base = self.config.params.model_dump()
        rows, passed = [], True
        for number in figures:
            report = reproduce_figure(
                number,
                base=base,
                points=options.get("points") or 96,
                coth=self.config.coth,
                tol=self.config.tol,
                workers=self.config.workers,
                branch_policy=self.config.branch_policy,
                bath_cutoff_factor=self.config.bath_cutoff_factor,
            )
            rows.extend(row.to_dict() for row in report.rows)
            passed = passed and report.passed
        return {
            "rows": rows,
            "columns": REPRODUCE_COLUMNS,
            "exit_code": 0 if passed else EXIT_CHECK_FAILED,
        }

    def handle_density(self, options: Dict[str, Any]) -> Dict[str, Any]:
        """Variance integrands on a frequency grid"""
        d = self._derived()
        branch = self._chosen_branches(d)[0]
        if not branch.stable:
            raise ConfigError("the spectral density needs a stable branch", field="branch_policy")
        lo = options.get("omega_start")
        hi = options.get("omega_stop")
        lo = -3.0 * d.omega_m if lo is None else lo
        hi = 3.0 * d.omega_m if hi is None else hi
        if options.get("hz"):
            lo, hi = hz_to_rad_s(lo), hz_to_rad_s(hi)
        omega = np.linspace(lo, hi, options.get("points") or 601)
        coth = self.config.coth or CothModel.for_temperature(d.temperature)
        S_Q, S_P = spectral_density(d, branch, omega, coth)
        rows = [
            {"omega": float(w), "S_Q_real": float(q.real), "S_Q_imag": float(q.imag),
             "S_P_real": float(p.real), "S_P_imag": float(p.imag)}
            for w, q, p in zip(omega, S_Q, S_P)
        ]
        return {"rows": rows, "columns": DENSITY_COLUMNS}
