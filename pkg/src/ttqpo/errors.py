"""Exception types raised across the package."""


class TTQPOError(Exception):
    """Base class for all errors raised by ttqpo."""


class ScheduleError(TTQPOError, ValueError):
    """A frequency schedule cannot be constructed from the given data."""


class InvalidIntervalError(ScheduleError):
    pass


class InvalidFrequencyError(ScheduleError):
    pass


class OutOfRangeError(TTQPOError, ValueError):
    """A time lies outside the interval a schedule or trajectory covers."""


class PreconditionError(TTQPOError, ValueError):
    """A documented precondition of an operation does not hold."""


class UndefinedSpectrumError(TTQPOError, ValueError):
    """The TT Hamiltonian has no discrete spectrum (Omega^2 <= 0) at the requested time."""


class IntegrationError(TTQPOError, RuntimeError):
    pass


class StepSizeUnderflowError(IntegrationError):
    pass


class WronskianBlowupError(IntegrationError):
    pass


class NonPositiveAmplitudeError(TTQPOError, ValueError):
    pass


class UndefinedQError(TTQPOError, ValueError):
    pass


class RadicandError(TTQPOError, ValueError):
    """The generating-function radicand is not positive for the given arguments."""


class TableOverflowError(TTQPOError, OverflowError):
    pass


class SingularKernelError(TTQPOError, ValueError):
    """The propagator kernel is singular because mu(t) is (numerically) zero."""
