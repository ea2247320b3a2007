"""Exception types raised by the numerical layers.

Everything raised on purpose by this package derives from
:class:`PearceyGapError`, so callers can catch one type at the boundary.
"""


class PearceyGapError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PearceyGapError):
    """An argument lies outside the mathematical domain of an operation
    (non-positive time gap, empty window, non-increasing interval, ...)."""


class AccuracyError(PearceyGapError):
    """A computation finished but failed its own accuracy certificate
    (quadrature refinement stalled, tail bound violated, ...)."""


class ContourError(PearceyGapError):
    """A contour specification is invalid: ray angles outside the admissible
    decay sectors, or a geometry that would cross the integrand's pole."""


class StabilityError(PearceyGapError):
    """A requested evaluation cannot be represented in double precision
    (exponent overflow in an unconjugated kernel, ...)."""


class ValidityError(PearceyGapError):
    """A result violates a structural requirement, e.g. a gap determinant
    that should lie in (0, 1] came out non-positive."""


class ConcurrencyError(PearceyGapError):
    """Another process holds an exclusive resource (e.g. the cache lock)."""
