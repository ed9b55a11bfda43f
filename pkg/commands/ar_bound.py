from config import RunConfig
from lab.iteration import ar_bound as compute_ar_bound
from reports import EXIT_PASS, CommandResult


def create_ar_bound_command():
    """Create the ar-bound handler."""

    def ar_bound(run_config: RunConfig) -> CommandResult:
        bound = compute_ar_bound(run_config.delta, run_config.gamma)
        text = f"delta={bound.delta:g} gamma={bound.gamma:g}: M={bound.M} L={bound.L} n0={bound.n0}\n"
        return CommandResult(exit_code=EXIT_PASS, payload=bound.model_dump(mode="json"), text=text)

    return ar_bound
