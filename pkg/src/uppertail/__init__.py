"""Upper tails of subgraph counts in sparse random graphs: rates, constructions and numerics."""

from .errors import DomainError, InfeasibleError, PreconditionError, ResourceError, UpperTailError

__version__ = "0.1.0"
