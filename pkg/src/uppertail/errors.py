"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: domain-type errors exit 3,
resource/budget errors exit 4.
"""


class UpperTailError(Exception):
    """Base class for all library errors."""


class DomainError(UpperTailError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class PreconditionError(DomainError):
    """A structural precondition failed (e.g. an excluded pattern)."""


class InfeasibleError(DomainError):
    """No admissible point satisfies the density constraint."""


class ResourceError(UpperTailError, RuntimeError):
    """The requested computation exceeds a configured budget."""
