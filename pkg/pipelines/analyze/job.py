"""
Analyze pipeline: trajectory.csv -> <analysis>.json

Analyses: precession-fit, thomas-check (needs the scenario), invariant-summary.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

_root = Path(__file__).resolve().parent.parent.parent
if str(_root) not in sys.path:
    sys.path.insert(0, str(_root))

from pipelines.analyze.precession_fit import precession_fit
from pipelines.scenario.job import Scenario, load_scenario
from utils.dynamics import ParticleState
from utils.errors import ConfigError
from utils.fields import sample
from utils.integrator import TRAJECTORY_COLUMNS
from utils.minkowski import AntisymTensor2, velocity_from_beta
from utils.spin import kinematic_thomas, precession_split

logger = logging.getLogger(__name__)

ANALYSES = ("precession-fit", "thomas-check", "invariant-summary")


def load_trajectory(csv_path: Path) -> pd.DataFrame:
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise FileNotFoundError(f"Trajectory CSV not found: {csv_path}")
    try:
        df = pd.read_csv(csv_path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise ConfigError([("csv", f"malformed CSV {csv_path}: {exc}")]) from exc
    if list(df.columns) != TRAJECTORY_COLUMNS:
        raise ConfigError([("csv", f"malformed CSV {csv_path}: unexpected header {list(df.columns)}")])
    if df.empty:
        raise ConfigError([("csv", f"malformed CSV {csv_path}: no rows")])
    numeric = df.apply(pd.to_numeric, errors="coerce")
    bad = [column for column in TRAJECTORY_COLUMNS if not np.isfinite(numeric[column].to_numpy(dtype=float)).all()]
    if bad:
        raise ConfigError([(column, f"malformed CSV {csv_path}: not numeric") for column in bad])
    return numeric.astype(float)


def thomas_check(df: pd.DataFrame, scenario: Scenario) -> dict:
    """Thomas frequency from its field expression and from the Lorentz-force acceleration, per sample."""
    params = scenario.params()
    model = scenario.field_model()
    worst, scale = 0.0, 0.0
    for row in df.itertuples(index=False):
        v = velocity_from_beta(np.array([row.bx, row.by, row.bz]), params.c)
        r = np.array([params.c * row.t, row.x, row.y, row.z])
        H = sample(model, r).H
        state = ParticleState(tau=row.tau, r=r, v=v, Pi=AntisymTensor2.zero())
        from_fields = precession_split(params, state, H).thomas
        kinematic = kinematic_thomas(params, state, H)
        worst = max(worst, float(np.max(np.abs(from_fields - kinematic))))
        scale = max(scale, float(np.max(np.abs(from_fields))))
    return {"samples": len(df), "max_discrepancy": worst, "max_thomas_frequency": scale}


def invariant_summary(df: pd.DataFrame) -> dict:
    zeta_norm = np.linalg.norm(df[["zx", "zy", "zz"]].to_numpy(), axis=1)
    m = df["m"].to_numpy()
    summary = {f"max_{col}": float(df[col].max()) for col in ("res_vv", "res_frenkel", "res_spinnorm", "res_massshell")}
    summary["max_zeta_norm_drift"] = float(np.max(np.abs(zeta_norm - zeta_norm[0])))
    summary["max_mass_variation"] = float(np.max(np.abs(m - m[0])) / abs(m[0]))
    summary["samples"] = len(df)
    return summary


def analyze_command(csv_path: Path, analysis: str, scenario: Scenario | None = None, normal=(0.0, 0.0, 1.0)) -> dict:
    """
    Run one analysis over a trajectory CSV and write <analysis>.json beside it.

    Raises:
        ConfigError: unknown analysis, malformed CSV, or thomas-check without a scenario.
    """
    if analysis not in ANALYSES:
        raise ConfigError([("analysis", f'unknown analysis "{analysis}", expected one of {list(ANALYSES)}')])
    df = load_trajectory(csv_path)
    if analysis == "precession-fit":
        report = precession_fit(df, normal).to_dict()
    elif analysis == "thomas-check":
        if scenario is None:
            raise ConfigError([("scenario", "thomas-check needs --scenario for the field model and particle")])
        report = thomas_check(df, scenario)
    else:
        report = invariant_summary(df)
    report = {"analysis": analysis, "csv": str(csv_path), **report}
    output_path = Path(csv_path).with_name(f"{analysis}.json")
    with open(output_path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2)
    logger.info("Output: %s", output_path)
    return report


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Analyze a trajectory CSV")
    parser.add_argument("--csv", type=Path, required=True)
    parser.add_argument("--analysis", choices=ANALYSES, required=True)
    parser.add_argument("--scenario", type=Path, default=None)
    args = parser.parse_args(argv)
    scenario = load_scenario(args.scenario) if args.scenario else None
    analyze_command(args.csv, args.analysis, scenario)


if __name__ == "__main__":
    main()
