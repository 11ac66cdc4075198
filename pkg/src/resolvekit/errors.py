"""Exception hierarchy shared across the toolkit.

The CLI maps these onto process exit codes, so new error kinds should
subclass one of the existing classes rather than ValueError directly.
"""


class ResolvekitError(Exception):
    """Base class for all toolkit errors."""


class MalformedInputError(ResolvekitError):
    """Invalid user-supplied data: bad ids, asymmetric matrices, parse failures."""


class DegenerateCommunityError(MalformedInputError):
    """A community collapsed to zero members during rescaling."""


class InfeasibleError(ResolvekitError):
    """No allocation can satisfy the requested collision threshold."""


class NoResolvingSetError(ResolvekitError):
    """The target matrix has duplicate rows, so no column subset resolves it."""


class SizeCapError(ResolvekitError):
    """Refused to run an exponential or cubic routine above its size cap."""


class OracleExhaustedError(ResolvekitError):
    """Exhaustive search hit its level cap without finding a feasible point."""


class UnreachableDistanceError(ResolvekitError):
    """An operation met an UNREACHABLE distance without an explicit substitute."""
