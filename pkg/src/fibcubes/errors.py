"""Exception types shared across the toolkit."""


class FibCubesError(Exception):
    """Base class for every computation failure raised by this package."""


class IdentityViolation(FibCubesError):
    """An exact algebraic identity did not hold (indicates an arithmetic bug)."""


class DomainError(FibCubesError, ValueError):
    """A ball operation was applied outside its domain (log of a ball touching 0, ...)."""


class PrecisionExhausted(FibCubesError):
    """The working precision is too low to certify a discrete decision."""


class StraddlesHalfInteger(PrecisionExhausted):
    """The nearest integer of a ball is ambiguous at the current precision."""


class BoundViolation(FibCubesError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class EpsilonNeverPositive(FibCubesError):
    """No convergent gave a certified positive reduction epsilon."""


class NonConvergent(FibCubesError):
    """A fixed-point iteration did not settle within its step budget."""


class StageError(FibCubesError):
    """A step of the proof pipeline produced an unusable result."""
