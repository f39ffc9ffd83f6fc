"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` for bad inputs (the CLI
maps these to exit status 2) and ``NumericalError`` for computations that
cannot produce a trustworthy number (exit status 3).
"""


class TTVouError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TTVouError, ValueError):
    pass


class NumericalError(TTVouError, ArithmeticError):
    pass


# -- validation ------------------------------------------------------------

class ProbabilityOutOfRange(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class NonPositiveMean(ValidationError):
    pass


class NonPositiveSample(ValidationError):
    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class TooFewSamples(ValidationError):
    pass


class NonRiskAverse(ValidationError):
    pass


class NonFiniteDeparture(ValidationError):
    pass


class StepTooLarge(ValidationError):
    pass


class SeedRequired(ValidationError):
    pass


class TooFewDraws(ValidationError):
    pass


class NotSmooth(ValidationError):
    """Operation needs a differentiable quantile function."""


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(ValidationError):
    pass


# -- numerical -------------------------------------------------------------

class DegenerateVariability(NumericalError):
    """Zero travel-time variance where a ratio needs a positive spread."""


class ZeroVariance(NumericalError):
    pass


class TailDivergence(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class MomentNotFinite(NumericalError):
    pass


class CrossCheckFailed(NumericalError):
    pass


class NumericalCurvatureUnstable(NumericalError):
    pass
