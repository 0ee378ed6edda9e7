class BudgetExceeded(RuntimeError):
    """A stage/depth/probe budget ran out before the answer stabilized."""

    def __init__(self, message: str, budget: int | None = None):
        super().__init__(message)
        self.budget = budget


class VerificationFailure(AssertionError):
    """An exhaustive structural check found a counterexample."""


class NotUnique(RuntimeError):
    """Extraction found two surviving full-depth candidates."""


class EmptyTree(RuntimeError):
    """Extraction found no surviving full-depth candidate."""


class InsufficientDepth(RuntimeError):
    """Materialized depth cannot certify the requested bound."""


class Undefined(LookupError):
    """A partial map or composed map has no value at the requested node."""


class OutOfSegment(ValueError):
    """A level or formula rank falls outside the materialized segment."""
