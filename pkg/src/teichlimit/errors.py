"""Exception classes raised across the package."""


class TeichLimitError(Exception):
    """Base class for all package errors."""


class DomainError(TeichLimitError, ValueError):
    """An argument lies outside the domain of a closed-form expression."""


class ContractViolation(TeichLimitError, ValueError):
    """Caller broke a documented precondition."""


class InsufficientDepth(TeichLimitError):
    """A schedule (or list of convergents) is too short for the request."""


class DepthCapExceeded(TeichLimitError):
    """Exact expansion refused because it would exceed the configured depth cap."""

    def __init__(self, requested: int, cap: int):
        super().__init__(f"exact expansion to depth {requested} exceeds depth cap {cap}")
        self.requested = requested
        self.cap = cap


class NotExplicit(TeichLimitError):
    """An exact operation met a digit stored only through its logarithm."""


class InsufficientPrecision(TeichLimitError):
    """An enclosure is too wide to determine a value to the requested accuracy."""


class PlanInfeasible(TeichLimitError):
    def __init__(self, j: int, detail: str = ""):
        super().__init__(f"dense plan infeasible at j={j}" + (f": {detail}" if detail else ""))
        self.j = j


class DigitCapExceeded(TeichLimitError):
    def __init__(self, required_digits: int, cap: int):
        super().__init__(
            f"digit needs {required_digits} decimal digits, cap is {cap}; "
            f"raise the digit cap to at least {required_digits}"
        )
        self.required_digits = required_digits
        self.cap = cap


class HorizonExceeded(TeichLimitError):
    """A time query lies beyond the last balance time a certificate covers."""


class CurveSpecError(TeichLimitError, ValueError):
    """A curve specification could not be parsed or violates the simplex constraints."""


class CertificateFormatError(TeichLimitError, ValueError):
    """A certificate file is malformed."""
