"""Shared exception types with stable meaning across the package."""


class HtwkError(Exception):
    """Base class for every error raised by this package."""


def _span_pair(span):
    if hasattr(span, "start"):
        return int(span.start), int(span.end)
    start, end = span
    return int(start), int(end)


class SpecSyntaxError(HtwkError):
    """Malformed distribution spec text; carries the offending source span
    as a plain (start, end) character-offset pair."""

    def __init__(self, message, span):
        self.span = _span_pair(span)
        super().__init__(f"{message} (at {self.span[0]}:{self.span[1]})")


class SpecValidationError(HtwkError):
    """Well-formed spec that violates a semantic constraint."""

    def __init__(self, message, span=None):
        self.span = None if span is None else _span_pair(span)
        if self.span is not None:
            message = f"{message} (at {self.span[0]}:{self.span[1]})"
        super().__init__(message)


class DivergenceError(HtwkError):
    """An improper integral was judged divergent; carries the partial sum."""

    def __init__(self, message, partial=float("nan")):
        super().__init__(message)
        self.partial = partial


class HorizonError(HtwkError):
    """A grid was queried or filled beyond its resolvable horizon."""


class BudgetError(HtwkError):
    """A simulation exceeded its configured step budget."""


class PreconditionError(HtwkError):
    """Operation preconditions not met by the supplied model or data."""
