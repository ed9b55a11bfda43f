import logging

from config import RunConfig
from lab.moduli import (
    M_coefficient,
    R_modulus,
    RW_MW,
    eq43_cross_check,
    fixed_point_profile,
    lemma41_equivalence,
    modulus_b,
    modulus_b1,
    modulus_d,
    nunc_witness,
)
from reports import EXIT_PASS, EXIT_VIOLATION, CommandResult, format_estimates

logger = logging.getLogger(__name__)

# Anchor norms at which R(a) and RW(a) are tabulated.
TABLE_ANCHORS = (0.0, 0.5, 1.0, 2.0)

CROSS_CHECK_TOLERANCE = 1e-6


def create_moduli_command():
    """Create the moduli handler.

    Returns:
        Callable: Handler taking a RunConfig and returning a CommandResult.
    """

    def moduli(run_config: RunConfig) -> CommandResult:
        """Tabulate every block-model modulus of the configured space and its fixed-point profile.

        Fails when the two evaluations of R(a) disagree or the three forms of
        M(X) > 1 do not agree on the a-grid.
        """
        norm_kind = run_config.norm_kind
        eps = run_config.eps
        a_grid = run_config.a_grid()

        estimates = [
            modulus_d(norm_kind, 1.0, eps=eps),
            modulus_b(norm_kind, 1.0, eps),
            modulus_b1(norm_kind, 1.0, eps),
        ]
        estimates.extend(R_modulus(norm_kind, a) for a in TABLE_ANCHORS)
        estimates.append(M_coefficient(norm_kind, a_grid))
        _, mw = RW_MW(norm_kind, a_grid)
        rw_table, _ = RW_MW(norm_kind, list(TABLE_ANCHORS))
        estimates.extend(rw_table)
        estimates.append(mw)

        profile = fixed_point_profile(run_config.space, a_grid, run_config.resolution, run_config.seed)
        estimates.append(profile.james)
        nunc = nunc_witness(norm_kind, eps, run_config.t_grid)

        payload = {"estimates": estimates, "nunc": nunc, "profile": profile}
        exit_code = EXIT_PASS
        if not profile.schur:
            cross_checks = [eq43_cross_check(norm_kind, a) for a in TABLE_ANCHORS]
            equivalence = lemma41_equivalence(norm_kind, a_grid)
            payload["cross_checks"] = cross_checks
            payload["equivalence"] = equivalence
            worst = max(c.deviation for c in cross_checks)
            if worst > CROSS_CHECK_TOLERANCE or not equivalence.agree:
                logger.warning(f"{norm_kind.label}: model consistency failed (deviation {worst:.3e})")
                exit_code = EXIT_VIOLATION

        text = format_estimates(estimates)
        text += f"NUNC eps={eps:g}: satisfied={nunc.satisfied} branch={nunc.branch} t={nunc.t} ({nunc.evidence})\n"
        return CommandResult(exit_code=exit_code, payload=payload, text=text)

    return moduli
