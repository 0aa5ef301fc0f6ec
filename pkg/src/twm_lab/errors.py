"""Exception hierarchy shared by every twm_lab module."""


class TWMError(Exception):
    """Base class for all errors raised by twm_lab."""


class InvalidInput(TWMError, ValueError):
    pass


class InvalidPoolState(InvalidInput):
    pass


class AllReservesZero(TWMError):
    """Mark-to-market weights are undefined because p.R == 0."""


class DegenerateDiscount(TWMError):
    """1 + F <= 0, so the diluted pool value is undefined."""


class InfeasibleDelta(TWMError):
    """R + delta has a negative component."""


class StepTooLarge(TWMError):
    """A finite-difference stencil would leave the positive price orthant."""


class NondifferentiablePoint(TWMError):
    """A gradient was requested exactly on a kink (min/max tie, abs(0), clip)."""


class MaxIterationsExceeded(TWMError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class QuadratureAcrossKink(TWMError):
    pass


class SearchBudgetExceeded(TWMError):
    pass


class PremiseFailure(TWMError):
    """Sampling found F > 1, so the premise of the witness search fails."""


class NoZeroState(TWMError):
    """No state with F = 0 is reachable under either reading of C1."""
