"""Error taxonomy shared by all modules.

Exit-code mapping used by the CLI: DomainError/UsageError -> 1,
NumericsError -> 2, ResourceError -> 3.
"""

__all__ = ["DomainError", "UsageError", "NumericsError", "ResourceError"]


class DomainError(ValueError):
    """Input violates a mathematical precondition (e.g. beta <= 0)."""


class UsageError(ValueError):
    """Malformed invocation: bad flag combination, unparseable config."""


class NumericsError(RuntimeError):
    """Optimization/quadrature failed to certify a result.

    Carries the best value seen so far and advice on which knob to turn.
    """

    def __init__(self, message, best=None, advice=None):
        self.best = best
        self.advice = advice
        full = message
        if advice:
            full = f"{message} ({advice})"
        super().__init__(full)


class ResourceError(RuntimeError):
    """Requested computation exceeds configured size/memory caps."""
