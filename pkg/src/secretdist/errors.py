"""Exception types raised across the package."""

from fractions import Fraction


class SecretDistError(ValueError):
    """Base class for every precondition failure raised by this package."""


class NegativeProbability(SecretDistError):
    pass


class NotNormalized(SecretDistError):
    def __init__(self, total: Fraction):
        super().__init__(f"probabilities sum to {total}, not 1")
        self.total = total


class UnknownSymbol(SecretDistError):
    pass


class UnknownVariable(SecretDistError):
    pass


class DuplicateOutcome(SecretDistError):
    pass


class ArityMismatch(SecretDistError):
    pass


class EmptySelection(SecretDistError):
    pass


class ZeroProbabilityEvent(SecretDistError):
    pass


class OwnershipViolation(SecretDistError):
    pass


class PartialFunction(SecretDistError):
    pass


class OverlappingGroups(SecretDistError):
    pass


class InconsistentMeasure(ArithmeticError):
    """A measure came out clearly negative; signals a numerical bug, not bad input."""


class AlphabetMismatch(SecretDistError):
    pass


class InvalidChannel(SecretDistError):
    pass


class AlphabetTooLarge(SecretDistError):
    pass


class InvalidConfig(SecretDistError):
    pass


class NonBinaryAlphabet(SecretDistError):
    pass


class InternalCheckFailed(RuntimeError):
    def __init__(self, check: str, detail: str = ""):
        super().__init__(f"check {check!r} failed" + (f": {detail}" if detail else ""))
        self.check = check


class UnknownQubit(SecretDistError):
    pass


class SameQubit(SecretDistError):
    pass


class EmptyOrFullSubsystem(SecretDistError):
    pass


class WrongDimension(SecretDistError):
    pass


class InvalidState(SecretDistError):
    pass


class FormatError(SecretDistError):
    """A distribution, channel or report file could not be parsed."""
