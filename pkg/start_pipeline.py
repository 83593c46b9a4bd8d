"""
Command-line entry point.

    python start_pipeline.py run --scenario scenarios/anomalous-precession.yaml
    python start_pipeline.py compare --scenario scenarios/cyclotron.yaml --formulations frenkel-corben,effective-field
    python start_pipeline.py sweep --scenario scenarios/anomalous-precession.yaml --param particle.g --values 2.001,2.002
    python start_pipeline.py analyze --csv data/dist/anomalous-precession/trajectory.csv --analysis precession-fit
    python start_pipeline.py validate --scenario scenarios/quadrupole-stern-gerlach.yaml

Exit codes: 0 ok, 2 configuration or input error, 3 numeric failure, 4 I/O error.
Outputs go to data/dist/ unless --out or SPIN_PIPELINE_OUT_DIR says otherwise.
"""

import argparse
import logging
import sys
from pathlib import Path

from pipelines.analyze.job import ANALYSES, analyze_command
from pipelines.compare.job import compare_command
from pipelines.run.job import run_command
from pipelines.scenario.job import load_scenario
from pipelines.sweep.job import parse_values, sweep_command
from utils.errors import ConfigError, NumericFailure, PreconditionError, RegimeError
from utils.integrator import FORMULATIONS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Covariant spin-dynamics scenarios")
    parser.add_argument("--quiet", action="store_true", help="only warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", type=Path, required=True)
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--formulation", choices=FORMULATIONS, default=None, help="override integrator.formulation")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    scenario_args(sub.add_parser("run", help="integrate one scenario"))
    compare = sub.add_parser("compare", help="run several formulations and tabulate deviations")
    scenario_args(compare)
    compare.add_argument("--formulations", required=True, help="comma-separated formulation tags")
    sweep = sub.add_parser("sweep", help="run one scenario over a list of parameter values")
    scenario_args(sweep)
    sweep.add_argument("--param", required=True, help="dotted key, e.g. particle.g")
    sweep.add_argument("--values", required=True, help="comma-separated numbers")
    analyze = sub.add_parser("analyze", help="post-process a trajectory CSV")
    analyze.add_argument("--csv", type=Path, required=True)
    analyze.add_argument("--analysis", choices=ANALYSES, required=True)
    analyze.add_argument("--scenario", type=Path, default=None, help="needed by thomas-check")
    analyze.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    validate = sub.add_parser("validate", help="parse and validate a scenario only")
    validate.add_argument("--scenario", type=Path, required=True)
    validate.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    return parser


def _dispatch(args: argparse.Namespace) -> None:
    if args.command == "analyze":
        scenario = load_scenario(args.scenario) if args.scenario else None
        analyze_command(args.csv, args.analysis, scenario)
        return

    scenario = load_scenario(args.scenario)
    if args.command == "validate":
        logger.info("Scenario OK: %s", args.scenario)
        return
    if args.formulation:
        scenario = scenario.with_formulation(args.formulation)
    if args.command == "run":
        run_command(scenario, args.out)
    elif args.command == "compare":
        table = compare_command(scenario, args.formulations.split(","), args.threads, args.out)
        if not table.empty:
            print(table.to_string(index=False))
    elif args.command == "sweep":
        sweep_command(scenario, args.param, parse_values(args.values), args.threads, args.out)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    try:
        _dispatch(args)
    except ConfigError as exc:
        for path, message in exc.violations:
            logger.error("%s: %s", path or "scenario", message)
        return EXIT_CONFIG
    except (NumericFailure, RegimeError, PreconditionError) as exc:
        logger.error("Numeric failure: %s", exc)
        return EXIT_NUMERIC
    except OSError as exc:
        logger.error("I/O error: %s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
