"""Exception hierarchy shared across the package."""


class GhzNetError(Exception):
    """Base class for all package errors."""


class TopologyError(GhzNetError, ValueError):
    """Invalid topology input (parse failure or invariant violation)."""

    def __init__(self, message, record=None):
        if record is not None:
            message = f"{message}: {record!r}"
        super().__init__(message)
        self.record = record


class InfeasibleRoutingError(GhzNetError):
    """No valid routing solution exists for the requested users."""

    def __init__(self, message, category=None):
        if category:
            message = f"{message} (topology looks {category})"
        super().__init__(message)
        self.category = category


class TimeslotLimitExceeded(GhzNetError):
    """A protocol run did not terminate within the configured slot budget."""


class MaximallyTrimmed(GhzNetError):
    """No repeater can be removed without breaking protocol feasibility."""
