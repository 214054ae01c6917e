"""Semantic exception hierarchy.

Every error raised by this package derives from :class:`IBLabError`, so
callers can catch one base type. Errors that are also domain violations
mix in ``ValueError`` to keep standard-library semantics.
"""


class IBLabError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(IBLabError, ValueError):
    """A probability object violates its invariants (sign, sum, shape)."""


class ParameterError(IBLabError, ValueError):
    """A call or configuration parameter is outside its documented domain."""


class SupportError(IBLabError, ValueError):
    """Absolute continuity violated: mass placed where the reference has none.

    Raised by KL divergence on p_i > 0 with q_i = 0, and by the variational
    bounds when a decoder/reconstructor/prior assigns zero probability to an
    outcome that actually occurs (a degenerate, -inf-valued bound).
    """


class BracketError(IBLabError, RuntimeError):
    """A bisection bracket does not enclose the requested target value."""
