"""Exception hierarchy shared by all modules."""


class NfSieveError(Exception):
    pass


class ParseError(NfSieveError):
    """Malformed field or extension data file."""


class ValidationError(NfSieveError):
    """A data invariant failed; ``invariant`` names it."""

    def __init__(self, invariant: str, detail: str = ""):
        self.invariant = invariant
        super().__init__(f"{invariant}: {detail}" if detail else invariant)


class ReductionFailure(NfSieveError):
    pass


class IndexDivisorError(NfSieveError):
    pass


class SingularSystem(NfSieveError):
    pass


class ScaleLimitExceeded(NfSieveError):
    pass


class CoprimalityError(NfSieveError):
    pass


class NotCoprime(CoprimalityError):
    pass


class NotSquarefree(NfSieveError):
    pass


class DensityViolation(NfSieveError):
    pass


class RangeError(NfSieveError):
    pass


class AmbiguousClass(NfSieveError):
    pass
