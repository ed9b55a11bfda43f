from typing import Callable, Dict

from .ar_bound import create_ar_bound_command
from .check_condition import create_check_condition_command
from .iterate import create_iterate_command
from .ledger import create_ledger_command
from .moduli import create_moduli_command
from .suite import create_suite_command


def init_commands(threads: int) -> Dict[str, Callable]:
    """Initialize every command handler with its dependencies.

    The suite handler receives the other handlers so that it can replay them
    for its determinism check.

    Args:
        threads (int): Upper bound on concurrently running suite checks.

    Returns:
        dict: Handler per command name, each taking a RunConfig and returning a CommandResult.
    """
    handlers = {
        "check-condition": create_check_condition_command(),
        "iterate": create_iterate_command(),
        "ar-bound": create_ar_bound_command(),
        "moduli": create_moduli_command(),
        "ledger": create_ledger_command(),
    }
    handlers["suite"] = create_suite_command(dict(handlers), threads)
    return handlers
