"""
Compare pipeline: one scenario, several formulations -> data/dist/<run>/compare.csv

Each formulation is integrated once (concurrently); every pair is then
compared on zeta, position and gamma. Pairs that include a uniform-only
formulation on a gradient field are reported as regime-excluded.
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from pathlib import Path

import pandas as pd

_root = Path(__file__).resolve().parent.parent.parent
if str(_root) not in sys.path:
    sys.path.insert(0, str(_root))

from pipelines.run.job import output_root
from pipelines.scenario.job import Scenario, load_scenario
from utils.errors import ConfigError
from utils.integrator import FORMULATIONS, UNIFORM_ONLY, deviation_between, run

logger = logging.getLogger(__name__)

COMPARE_COLUMNS = ["formulation_a", "formulation_b", "status", "zeta", "position", "gamma"]


def _run_formulation(scenario: Scenario, formulation: str) -> pd.DataFrame:
    trajectory, _ = run(
        scenario.step_config(),
        formulation,
        scenario.params(),
        scenario.initial_state(formulation),
        scenario.field_model(),
    )
    return trajectory


def compare_command(
    scenario: Scenario,
    formulations: list[str],
    threads: int = 1,
    out_dir: Path | None = None,
) -> pd.DataFrame:
    """
    Table of max deviations per formulation pair, in the order the pairs are listed.
    A single formulation gives an empty table.
    """
    unknown = [f for f in formulations if f not in FORMULATIONS]
    if unknown:
        raise ConfigError([("formulations", f"unknown formulations {unknown}, expected from {list(FORMULATIONS)}")])
    if "shirokov-momentum" in formulations and scenario.particle.hbar == 0:
        raise ConfigError([("particle.hbar", "shirokov-momentum needs hbar > 0")])
    formulations = list(dict.fromkeys(formulations))
    gradient = scenario.field_model().has_gradient
    runnable = [f for f in formulations if not (gradient and f in UNIFORM_ONLY)]

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        futures = {f: pool.submit(_run_formulation, scenario, f) for f in runnable}
        trajectories = {f: fut.result() for f, fut in futures.items()}

    rows = []
    for a, b in combinations(formulations, 2):
        if a not in trajectories or b not in trajectories:
            rows.append({"formulation_a": a, "formulation_b": b, "status": "regime-excluded"})
            continue
        d = deviation_between(a, b, trajectories[a], trajectories[b])
        rows.append({
            "formulation_a": a,
            "formulation_b": b,
            "status": "ok",
            "zeta": d.zeta,
            "position": d.position,
            "gamma": d.gamma,
        })
    table = pd.DataFrame(rows, columns=COMPARE_COLUMNS)

    run_dir = (out_dir or output_root()) / scenario.output.path
    run_dir.mkdir(parents=True, exist_ok=True)
    output_path = run_dir / "compare.csv"
    table.to_csv(output_path, index=False, float_format="%.17g")
    logger.info("Output: %s (%d pairs)", output_path, len(table))
    return table


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="Compare formulations on one scenario")
    parser.add_argument("--scenario", type=Path, required=True)
    parser.add_argument("--formulations", required=True, help="comma-separated formulation tags")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--out", type=Path, default=None)
    args = parser.parse_args(argv)
    compare_command(load_scenario(args.scenario), args.formulations.split(","), args.threads, args.out)


if __name__ == "__main__":
    main()
