"""Exception hierarchy for hrtlab."""


class HRTLabError(Exception):
    """Base class for all library errors."""


class InvalidSpec(HRTLabError, ValueError):
    pass


class ZeroWindow(HRTLabError, ValueError):
    pass


class QuadratureFailure(HRTLabError, ArithmeticError):
    """Panel budget exhausted before the requested tolerance was met."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class DuplicatePoint(HRTLabError, ValueError):
    def __init__(self, i, j, point):
        point = tuple(float(v) for v in point)
        super().__init__(f"points {i} and {j} coincide at {point}")
        self.pair = (i, j)
        self.point = point


class DegenerateConfig(HRTLabError, ValueError):
    pass


class NotOneN(HRTLabError, ValueError):
    pass


class SingularBase(HRTLabError, ArithmeticError):
    """The base Gramian is not numerically positive definite."""


class NotApplicable(HRTLabError, ValueError):
    pass


class TailBoundTooLarge(HRTLabError, ArithmeticError):
    """Decay metadata cannot certify a truncation tail.

    ``value`` carries the raw (uncertified) result when one was computed.
    """

    def __init__(self, message, value=None):
        super().__init__(message)
        self.value = value


class NumericalGuard(HRTLabError, ArithmeticError):
    """A consistency guard (imaginary part, solve residual) was violated."""
