"""Exception types raised across the package."""


class MrDroError(Exception):
    """Base class for all package errors."""


class MalformedProblem(MrDroError, ValueError):
    pass


class NumericalBreakdown(MrDroError, ArithmeticError):
    pass


class TooLarge(MrDroError):
    pass


class NoRealizedEvents(MrDroError, ValueError):
    pass


class TrustNotSimplex(MrDroError, ValueError):
    pass


class NeedTwoSources(MrDroError, ValueError):
    pass


class AllWeightsVanished(MrDroError, ArithmeticError):
    pass


class InsufficientSamples(MrDroError, ValueError):
    pass


class DimensionMismatch(MrDroError, ValueError):
    pass


class UnsupportedNorm(MrDroError, ValueError):
    pass


class InfeasibleDecision(MrDroError, ValueError):
    pass


class BadTruncation(MrDroError, ValueError):
    pass


class SolveFailed(MrDroError):
    """An LP came back Infeasible or Unbounded where an optimum was required."""

    def __init__(self, status, message=""):
        self.status = status
        super().__init__(message or f"LP solve failed with status {status}")


class ConfigError(MrDroError, ValueError):
    pass
