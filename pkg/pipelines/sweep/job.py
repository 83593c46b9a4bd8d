"""
Sweep pipeline: one scenario, one parameter, many values -> data/dist/<run>/sweep-NNN/ + sweep.csv
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import pandas as pd

_root = Path(__file__).resolve().parent.parent.parent
if str(_root) not in sys.path:
    sys.path.insert(0, str(_root))

from pipelines.run.job import output_root, run_command
from pipelines.scenario.job import Scenario, load_scenario, set_parameter
from utils.errors import ConfigError

logger = logging.getLogger(__name__)


def parse_values(text: str) -> list[float]:
    """Comma-separated numbers; whole numbers come back as int so integer keys accept them."""
    try:
        numbers = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError([("values", f"expected comma-separated numbers, got {text!r}")]) from exc
    return [int(x) if x.is_integer() else x for x in numbers]


def sweep_scenarios(scenario: Scenario, param: str, values: list[float]) -> list[Scenario]:
    """One validated scenario per value, each writing into its own sub-directory."""
    if not values:
        raise ConfigError([("values", "sweep needs at least one value")])
    variants = []
    for index, value in enumerate(values):
        variant = set_parameter(scenario, param, value)
        output = replace(variant.output, path=f"{scenario.output.path}/sweep-{index:03d}")
        variants.append(replace(variant, output=output))
    return variants


def sweep_command(
    scenario: Scenario,
    param: str,
    values: list[float],
    threads: int = 1,
    out_dir: Path | None = None,
) -> pd.DataFrame:
    """Run every variant concurrently; the summary is ordered by value index."""
    out_dir = out_dir or output_root()
    variants = sweep_scenarios(scenario, param, values)
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        reports = list(pool.map(lambda s: run_command(s, out_dir), variants))

    rows = []
    for index, (value, report) in enumerate(zip(values, reports)):
        spin = report.observables.get("spin_velocity_precession", {})
        rows.append({
            "index": index,
            "param": param,
            "value": value,
            "samples": report.samples,
            "spin_omega": spin.get("omega"),
            "spin_omega_residual": spin.get("residual"),
            "max_res_vv": report.diagnostics["max_res_vv"],
            "max_res_frenkel": report.diagnostics["max_res_frenkel"],
            "max_res_spinnorm": report.diagnostics["max_res_spinnorm"],
        })
    summary = pd.DataFrame(rows)
    output_path = out_dir / scenario.output.path / "sweep.csv"
    output_path.parent.mkdir(parents=True, exist_ok=True)
    summary.to_csv(output_path, index=False, float_format="%.17g")
    logger.info("Output: %s (%d runs)", output_path, len(summary))
    return summary


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Sweep one scenario parameter")
    parser.add_argument("--scenario", type=Path, required=True)
    parser.add_argument("--param", required=True, help="dotted key, e.g. particle.g")
    parser.add_argument("--values", required=True, help="comma-separated numbers")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args(argv)
    sweep_command(load_scenario(args.scenario), args.param, parse_values(args.values), args.threads, args.out)


if __name__ == "__main__":
    main()
