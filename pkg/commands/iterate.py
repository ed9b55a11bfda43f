import logging

from config import RunConfig
from lab.iteration import afps_extract, orbit, verify_identity3, verify_residual_monotonicity
from lab.mappings import check_condition_C_lambda
from lab.models import Vector
from lab.space import extreme_point, grid_points
from reports import EXIT_PASS, EXIT_VIOLATION, CommandResult, orbit_csv

logger = logging.getLogger(__name__)

# Contract bound on the identity deviation along an orbit.
IDENTITY_TOLERANCE = 1e-10


def create_iterate_command():
    """Create the iterate handler.

    Returns:
        Callable: Handler taking a RunConfig and returning a CommandResult.
    """

    def iterate(run_config: RunConfig) -> CommandResult:
        """Compute a T_gamma orbit, attest (C_lambda) on the body grid and verify the orbit identities.

        The orbit is also returned as CSV.
        """
        mapping = run_config.mapping()
        x0 = (
            Vector.of(run_config.x0, mapping.body.space)
            if run_config.x0 is not None
            else extreme_point(mapping.body)
        )
        trace = orbit(mapping, run_config.gamma, x0, run_config.steps)
        deviation = verify_identity3(trace, mapping)
        afps = afps_extract(trace, run_config.tol)

        step = run_config.grid_step(mapping.body.space.dimension)
        attestation = check_condition_C_lambda(mapping, run_config.lam, grid_points(mapping.body, step), step)
        monotonicity = verify_residual_monotonicity(trace, attestation)

        passed = monotonicity.monotone and deviation <= IDENTITY_TOLERANCE
        if not passed:
            logger.warning(f"{mapping.name}: orbit identities failed (deviation {deviation:.3e})")
        payload = {
            "trace": trace,
            "identity3_deviation": deviation,
            "monotonicity": monotonicity,
            "afps_count": len(afps),
            "attestation": {
                "condition": attestation.condition,
                "lambda": attestation.lam,
                "grid_resolution": attestation.grid_resolution,
                "verdict": attestation.verdict,
            },
        }
        text = (
            f"{mapping.name}: {trace.steps} steps, final residual {trace.residuals[-1]:.6e}, "
            f"monotone={monotonicity.monotone}, identity deviation {deviation:.3e}, afps points {len(afps)}\n"
        )
        return CommandResult(
            exit_code=EXIT_PASS if passed else EXIT_VIOLATION,
            payload=payload,
            csv=orbit_csv(trace),
            text=text,
        )

    return iterate
