"""Exception hierarchy shared by all lplde modules."""


class LPLDEError(Exception):
    """Base class for every error raised by this package."""


class RingMismatch(LPLDEError, TypeError):
    """Operands live in different coefficient rings (or precisions)."""


class DivisionByZero(LPLDEError, ZeroDivisionError):
    pass


class ResonantRHS(LPLDEError, ValueError):
    """A secular cos/sin term was passed to the linear oscillator solver."""


class InvalidFamily(LPLDEError, ValueError):
    pass


class NonOscillatory(LPLDEError, ValueError):
    """Amplitude lies outside the turning points of the potential."""


class NoRealRoot(LPLDEError, ArithmeticError):
    pass


class OrderOutOfRange(LPLDEError, IndexError):
    pass


class ParameterDependence(LPLDEError, AssertionError):
    """A coefficient that should be parameter-free differed between runs."""


class InsufficientData(LPLDEError, ValueError):
    pass


class NoSignChange(LPLDEError, ValueError):
    pass


class ToleranceNotReached(LPLDEError, RuntimeError):
    pass


class QuadratureFailure(LPLDEError, RuntimeError):
    pass


class StepSizeUnderflow(LPLDEError, RuntimeError):
    pass


class NoConvergence(LPLDEError, RuntimeError):
    pass


class InsufficientSpan(LPLDEError, ValueError):
    pass


class NoCrossing(LPLDEError, RuntimeError):
    pass


class ConfigError(LPLDEError, ValueError):
    pass
