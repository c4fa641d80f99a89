"""Exception hierarchy shared by all modules."""


class LifecdError(Exception):
    """Base class for every error raised by this package."""


class ParseError(LifecdError, ValueError):
    """A graph document line could not be parsed."""


class ValidationError(LifecdError, ValueError):
    """Input parsed but violates a graph or config invariant."""


class UnknownEdge(ValidationError):
    pass


class DomainError(LifecdError, ValueError):
    """Argument outside its mathematical domain."""


class LengthMismatch(LifecdError, ValueError):
    pass


class EmptyList(LifecdError, ValueError):
    pass


class NumericError(LifecdError):
    """Truncated distribution cannot answer the request accurately."""


class TailTooHeavy(NumericError):
    pass


class TruncationError(NumericError):
    """Tail mass still above tolerance at the truncation cap."""


class NotTerminal(LifecdError):
    pass


class InternalInvariantViolation(LifecdError, AssertionError):
    """Reduction bookkeeping desynchronized. Indicates a bug, not bad input."""


class TooLarge(LifecdError, ValueError):
    pass


class TruncationWarning(UserWarning):
    pass
