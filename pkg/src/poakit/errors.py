"""Exception hierarchy shared by every poakit module."""


class PoAError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ValidationError(PoAError, ValueError):
    """Malformed input: wrong lengths, bad indices, schema violations."""

    exit_code = 2


class CapExceeded(PoAError):
    """An enumeration would exceed the configured cap."""

    exit_code = 3


class NoFiniteBound(PoAError):
    """The optimal LP value gives no finite efficiency bound (rho <= 0)."""

    exit_code = 4


class NumericOverflow(PoAError, ArithmeticError):
    """Rational entries grew past the configured bit limit; retry in float mode."""


class NoPureNash(PoAError):
    exit_code = 4


class ZeroOptimalCost(PoAError, ZeroDivisionError):
    exit_code = 4


class HypothesisViolated(PoAError):
    """A precondition on the game (e.g. sum of local costs covering C) fails.

    ``witness`` holds the offending allocation.
    """

    exit_code = 2

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class VerificationFailed(PoAError):
    """A constructed object failed its own verification; ``payload`` keeps it for debugging."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload
