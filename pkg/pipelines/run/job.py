"""
Run pipeline: scenario.yaml -> data/dist/<run>/trajectory.csv + report.json (+ spin.svg)
"""

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import pandas as pd

_root = Path(__file__).resolve().parent.parent.parent
if str(_root) not in sys.path:
    sys.path.insert(0, str(_root))

from pipelines.analyze.precession_fit import orbit_circle_fit, precession_fit, velocity_rotation_fit
from pipelines.scenario.job import Scenario, load_scenario, scenario_to_dict
from utils.integrator import TRAJECTORY_COLUMNS, Diagnostics, run

logger = logging.getLogger(__name__)

CSV_SCHEMA_VERSION = 1
CSV_HEADERS = {1: TRAJECTORY_COLUMNS}

OUT_DIR_ENV = "SPIN_PIPELINE_OUT_DIR"


def _project_root() -> Path:
    return Path(__file__).resolve().parent.parent.parent


def output_root() -> Path:
    """Default output directory, overridable through SPIN_PIPELINE_OUT_DIR."""
    override = os.environ.get(OUT_DIR_ENV, "").strip()
    return Path(override) if override else _project_root() / "data" / "dist"


@dataclass
class RunReport:
    scenario: dict
    formulation: str
    wall_time: float
    samples: int
    diagnostics: dict
    observables: dict
    csv_schema_version: int = CSV_SCHEMA_VERSION

    def to_dict(self) -> dict:
        return asdict(self)


def derived_observables(scenario: Scenario, trajectory: pd.DataFrame) -> dict:
    """Fitted frequencies (each with its residual) and orbit radius, where the data supports them."""
    observables = {}
    if len(trajectory) < 3:
        return observables
    spin = precession_fit(trajectory)
    observables["spin_velocity_precession"] = spin.to_dict()
    moving = trajectory[["bx", "by"]].abs().to_numpy().max() > 0
    if moving:
        observables["orbital_rotation"] = velocity_rotation_fit(trajectory).to_dict()
        turned = trajectory[["x", "y"]].to_numpy().std(axis=0).min() > 0
        if turned:
            observables["orbit_circle"] = orbit_circle_fit(trajectory).to_dict()
    f = scenario.field
    if f.type == "uniform" and not any(f.E):
        p = scenario.particle
        b_norm = sum(x * x for x in f.B) ** 0.5
        observables["anomalous_frequency_expected"] = (p.g - 2.0) / 2.0 * abs(p.e) * b_norm / (p.m0 * p.c)
        observables["anomalous_frequency_fit"] = abs(spin.omega)
    return observables


def write_trajectory(trajectory: pd.DataFrame, path: Path) -> None:
    trajectory.to_csv(path, index=False, float_format="%.17g")


def run_command(scenario: Scenario, out_dir: Path | None = None) -> RunReport:
    """
    Integrate one scenario and write its artifacts.

    Returns:
        The run report (also written as report.json next to the CSV).
    """
    run_dir = (out_dir or output_root()) / scenario.output.path
    run_dir.mkdir(parents=True, exist_ok=True)

    formulation = scenario.integrator.formulation
    started = time.perf_counter()
    trajectory, diagnostics = run(
        scenario.step_config(),
        formulation,
        scenario.params(),
        scenario.initial_state(),
        scenario.field_model(),
    )
    wall_time = time.perf_counter() - started

    csv_path = run_dir / "trajectory.csv"
    write_trajectory(trajectory, csv_path)
    report = RunReport(
        scenario=scenario_to_dict(scenario),
        formulation=formulation,
        wall_time=wall_time,
        samples=len(trajectory),
        diagnostics=diagnostics.to_dict(),
        observables=derived_observables(scenario, trajectory),
    )
    with open(run_dir / "report.json", "w", encoding="utf-8") as f:
        json.dump(report.to_dict(), f, indent=2)
    if scenario.output.format == "csv+svg":
        from pipelines.run.plot import write_spin_svg

        write_spin_svg(trajectory, run_dir / "spin.svg", title=scenario.name)
    _log_diagnostics(diagnostics)
    logger.info("Output: %s (%d samples)", csv_path, len(trajectory))
    return report


def _log_diagnostics(diagnostics: Diagnostics) -> None:
    logger.info(
        "Max residuals: vv=%.3e frenkel=%.3e spin-norm=%.3e mass-shell=%.3e",
        diagnostics.max_res_vv,
        diagnostics.max_res_frenkel,
        diagnostics.max_res_spinnorm,
        diagnostics.max_res_massshell,
    )


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Integrate one scenario")
    parser.add_argument("--scenario", type=Path, required=True)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args(argv)
    run_command(load_scenario(args.scenario), args.out)


if __name__ == "__main__":
    main()
