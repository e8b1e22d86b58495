"""Exception types shared across the package."""


class BiliftError(Exception):
    """Base class for all package errors."""


class NotMinimalCover(BiliftError, ValueError):
    """The coefficients selected as the cover do not form a minimal cover."""


class Infeasible(BiliftError, ValueError):
    """The bilinear set is empty: no box point satisfies the constraint."""


class SearchCapExceeded(BiliftError, RuntimeError):
    """Partition search gave up above the exhaustive cap without finding a cover.

    This is *not* a proof that no cover exists.
    """


class CapExceeded(BiliftError, ValueError):
    """An enumeration was requested beyond its configured size cap."""


class ClassMismatch(BiliftError, ValueError):
    """A lifting term was requested for a class inconsistent with its coefficient."""


class PreconditionViolated(BiliftError, ValueError):
    """Generic precondition failure for an operation."""


class RestrictionEmpty(BiliftError, ValueError):
    """The restriction defined by the fixings has no feasible point."""


class SeedRejected(BiliftError, ValueError):
    """A user-supplied seed inequality failed its concavity or validity spot-check."""
