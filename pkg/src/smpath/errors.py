class SMError(Exception):
    """Base class for errors raised by smpath."""


class InvalidModelError(SMError, ValueError):
    """Model kind or parameters not valid for the requested operation."""


class DomainError(SMError, ValueError):
    """Argument outside the domain of an operation (intervals, levels, orders)."""


class ResourceLimitError(SMError, RuntimeError):
    """Request exceeds a configured size cap."""


class QuadratureError(SMError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before reaching its tolerance."""

    def __init__(self, message: str, estimate: float, error_estimate: float):
        super().__init__(f"{message} (value {estimate!r}, error estimate {error_estimate:.3e})")
        self.estimate = estimate
        self.error_estimate = error_estimate
