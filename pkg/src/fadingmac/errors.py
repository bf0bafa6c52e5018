"""Exception types shared across the package."""


class FadingMacError(Exception):
    """Base class for all package errors."""


class DomainError(FadingMacError, ValueError):
    """An argument is outside the mathematical domain of the function."""


class DegenerateSpectrumError(FadingMacError, ValueError):
    """Two spectrum entries coincide where strict ordering is required."""


class DimensionError(FadingMacError, ValueError):
    """Matrix or channel dimensions are inconsistent."""


class QuadratureError(FadingMacError, RuntimeError):
    """Adaptive quadrature failed to reach the requested panel accuracy."""


class NonConvergenceError(FadingMacError, RuntimeError):
    """An iterative solver stopped without meeting its tolerance.

    Carries the best iterate found and a diagnostics trace.
    """

    def __init__(self, message, best=None, trace=None):
        super().__init__(message)
        self.best = best
        self.trace = trace


class NegativeInnerAverageError(FadingMacError, RuntimeError):
    """The signed log-sum-exp of an inner Monte-Carlo average came out
    nonpositive, signalling insufficient inner samples."""


class PerturbationInstabilityError(FadingMacError, RuntimeError):
    """Richardson extrapolation of the eigenvalue perturbation disagrees
    with the Monte-Carlo noise floor by too much."""
