"""Exception hierarchy shared by every module of the package."""


class BoltzmannError(Exception):
    """Base class for all package errors."""


class ParameterDomainError(BoltzmannError, ValueError):
    """A parameter lies outside the domain of the operation."""


class DivergentRateError(BoltzmannError, ValueError):
    """The dominating Poisson rate (or a size series) diverges."""


class BoundViolationError(BoltzmannError):
    """A counting sequence exceeds its declared growth bound."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class RetriesExhaustedError(BoltzmannError):
    """A rejection loop hit its attempt budget without accepting."""

    def __init__(self, attempts):
        super().__init__(f"no acceptable sample after {attempts} attempts")
        self.attempts = attempts


class UnreachableTargetError(BoltzmannError, ValueError):
    """A calibration target cannot be reached inside the admissible range of z."""


class NonConvergenceError(BoltzmannError, RuntimeError):
    """An iterative numerical procedure did not converge."""


class CapacityError(BoltzmannError, ValueError):
    """An exhaustive enumeration would exceed its size limit."""
