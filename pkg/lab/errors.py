class LabError(Exception):
    """Base class for every error raised by the lab library."""


class InputError(LabError, ValueError):
    """Invalid arguments: dimension mismatch, out-of-range parameters, empty inputs."""


class MappingError(LabError):
    """A mapping produced an image outside of its convex body."""


class PreconditionError(LabError):
    """An operation was called without the attested evidence it requires."""
