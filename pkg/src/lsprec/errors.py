# Shared exception types. Numerical failures map to CLI exit code 3,
# configuration problems to exit code 2.


class ConfigError(Exception):
    """Invalid or unknown configuration input."""


class NumericalError(Exception):
    """Base class for numerical failures during estimation or testing."""


class IllConditionedError(NumericalError):
    """Design or covariance matrix too ill conditioned to use.

    Carries the offending condition-number estimate in ``cond``.
    """

    def __init__(self, message, cond=None):
        super().__init__(message)
        self.cond = cond


class PowerIterationError(NumericalError):
    """Power iteration failed to converge; carries the last iterate."""

    def __init__(self, message, last_estimate=None, iterations=None):
        super().__init__(message)
        self.last_estimate = last_estimate
        self.iterations = iterations


class KernelWindowError(NumericalError):
    """Kernel window contained no observations."""
