import logging

from config import RunConfig
from lab.errors import InputError
from lab.ledger import LEDGER, sweep
from reports import EXIT_INPUT, EXIT_PASS, EXIT_VIOLATION, CommandResult, format_table

logger = logging.getLogger(__name__)


def create_ledger_command():
    """Create the ledger handler.

    Returns:
        Callable: Handler taking a RunConfig and returning a CommandResult.
    """

    def ledger(run_config: RunConfig) -> CommandResult:
        """Sweep one ledger check (or ``all``) over seeded samples of its premise region.

        Exit code 1 on any violated clause, 2 when a region never satisfied
        its premise or was too thin to sample.
        """
        if run_config.name == "all":
            names = sorted(LEDGER)
        elif run_config.name in LEDGER:
            names = [run_config.name]
        else:
            raise InputError(f"Unknown ledger check '{run_config.name}', expected 'all' or one of {sorted(LEDGER)}")

        reports = []
        for name in names:
            options = {"exact": True} if name == "thm21" and run_config.exact else {}
            reports.append(sweep(name, run_config.samples, run_config.seed, **options))

        if any(r.verdict == "violated" for r in reports):
            exit_code = EXIT_VIOLATION
        elif any(r.verdict == "premise_never_satisfied" or r.degenerate for r in reports):
            exit_code = EXIT_INPUT
        else:
            exit_code = EXIT_PASS

        rows = [
            (r.name, r.verdict == "holds_on_samples" and not r.degenerate, f"{r.verdict}, {r.premise_hits}/{r.samples} premise hits")
            for r in reports
        ]
        return CommandResult(exit_code=exit_code, payload={"reports": reports}, text=format_table(rows))

    return ledger
