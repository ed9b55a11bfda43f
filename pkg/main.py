import argparse
import logging
import sys
import time
from typing import List, Optional

from pydantic import ValidationError

import config
from commands import init_commands
from lab.errors import LabError
from reports import EXIT_INPUT, write_outputs
from version import LIBRARY_VERSION

logger = logging.getLogger(__name__)


def _exponent(value: str):
    """--p accepts a number or 'sup'."""
    if value.lower() in ("sup", "inf"):
        return "sup"
    return float(value)


def _floats(value: str) -> List[float]:
    return [float(part) for part in value.split(",") if part.strip()]


def create_parser() -> argparse.ArgumentParser:
    """Build the argument parser: one subcommand per command, shared override flags."""
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="YAML file with run parameters")
    shared.add_argument("--map", help="Zoo map name or threshold_family:<jump>")
    shared.add_argument("--condition", choices=["C_lambda", "nonexpansive", "L_witness"])
    shared.add_argument("--lambda", dest="lam", type=float)
    shared.add_argument("--gamma", type=float)
    shared.add_argument("--delta", type=float)
    shared.add_argument("--eps", type=float)
    shared.add_argument("--p", type=_exponent, help="Norm exponent or 'sup'")
    shared.add_argument("--dim", type=int)
    shared.add_argument("--step", type=float, help="Grid resolution")
    shared.add_argument("--samples", type=int)
    shared.add_argument("--seed", type=int)
    shared.add_argument("--out", help="Output directory for reports")
    shared.add_argument("--name", help="Ledger check name or 'all'")
    shared.add_argument("--steps", type=int)
    shared.add_argument("--x0", type=_floats, help="Comma-separated starting point")
    shared.add_argument("--tol", type=float)
    shared.add_argument("--a-step", dest="a_step", type=float)
    shared.add_argument("--t-grid", dest="t_grid", type=_floats, help="Comma-separated t values")
    shared.add_argument("--resolution", type=int)
    shared.add_argument("--exact", action="store_true", default=None)
    shared.add_argument("--horizon", type=int)
    shared.add_argument("--starts", type=int)
    shared.add_argument("--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="fpt-lab",
        description="Verification lab for generalized nonexpansive mappings",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {LIBRARY_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in config.COMMANDS:
        subparsers.add_parser(command, parents=[shared])
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and write its reports.

    Returns:
        int: 0 when every verdict passes, 1 on a violation, 2 on invalid
            input, an unmet precondition or a schema violation.
    """
    args = create_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)

    overrides = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
    try:
        file_values = config.load_config(args.config) if args.config else {}
        run_config = config.resolve_run_config(args.command, file_values, overrides)
    except (FileNotFoundError, ValueError, ImportError) as e:
        # pydantic's ValidationError is a ValueError
        logger.error(f"Configuration error: {e}")
        return EXIT_INPUT

    handlers = init_commands(config.thread_limit())
    started = time.perf_counter()
    try:
        result = handlers[run_config.command](run_config)
    except (LabError, ValidationError) as e:
        # input, precondition and map errors alike
        logger.error(f"{run_config.command}: {e}")
        return EXIT_INPUT
    duration = time.perf_counter() - started

    if result.text:
        sys.stdout.write(result.text)
    if run_config.out:
        write_outputs(run_config.out, run_config, result, duration)
    logger.info(f"{run_config.command} finished in {duration:.3f}s with exit code {result.exit_code}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(run())
