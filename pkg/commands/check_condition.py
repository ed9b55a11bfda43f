import logging

from config import RunConfig
from lab.iteration import afps_extract, orbit
from lab.mappings import check_condition_C_lambda, check_condition_L_witness, check_nonexpansive
from lab.models import Vector
from lab.space import extreme_point, grid_points
from lab.utils import DEFAULT_TAIL_WINDOW
from reports import EXIT_PASS, EXIT_VIOLATION, CommandResult

logger = logging.getLogger(__name__)


def create_check_condition_command():
    """Create the check-condition handler.

    Returns:
        Callable: Handler taking a RunConfig and returning a CommandResult.
    """

    def check_condition(run_config: RunConfig) -> CommandResult:
        """Grid-check nonexpansiveness, (C_lambda) or an (L) witness for one map.

        The grid is the regular grid of the map's body at ``step``, by default
        a step that depends on the body's dimension. For the (L) witness the
        afps is the tolerance-filtered tail of the orbit from ``x0`` (default:
        the body's extreme point).
        """
        mapping = run_config.mapping()
        step = run_config.grid_step(mapping.body.space.dimension)
        grid = grid_points(mapping.body, step)
        logger.info(f"{mapping.name}: {run_config.condition} check on {len(grid)} grid points")

        if run_config.condition == "nonexpansive":
            report = check_nonexpansive(mapping, grid, step)
        elif run_config.condition == "C_lambda":
            report = check_condition_C_lambda(mapping, run_config.lam, grid, step)
        else:
            x0 = (
                Vector.of(run_config.x0, mapping.body.space)
                if run_config.x0 is not None
                else extreme_point(mapping.body)
            )
            trace = orbit(mapping, run_config.gamma, x0, run_config.steps)
            tail = afps_extract(trace, run_config.tol)
            window = min(DEFAULT_TAIL_WINDOW, len(tail)) or 1
            report = check_condition_L_witness(mapping, tail, grid, window)

        exit_code = EXIT_VIOLATION if report.verdict == "violated" else EXIT_PASS
        text = f"{report.condition} {mapping.name}: {report.verdict} ({report.pairs_checked} pairs, {len(report.violations)} violations)\n"
        return CommandResult(exit_code=exit_code, payload={"report": report}, text=text)

    return check_condition
