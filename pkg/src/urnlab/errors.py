"""Exception types shared across the package."""


class UrnError(Exception):
    """Base class for urnlab errors."""


class InsufficientBallsError(UrnError, ValueError):
    """The urn holds fewer balls than the requested sample size."""


class StateBudgetExceeded(UrnError, RuntimeError):
    """The exact oracle would need more states than its budget allows."""

    def __init__(self, reachable: int, budget: int, step: int):
        super().__init__(
            f"reachable state count {reachable} exceeds budget {budget} at step {step}"
        )
        self.reachable = reachable
        self.budget = budget
        self.step = step


class UnsupportedError(UrnError, ValueError):
    """The requested quantity is not defined for this model."""
