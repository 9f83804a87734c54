class NumericalError(RuntimeError):
    """A solver could not produce a trustworthy result (CLI exit code 3)."""


class StabilityError(NumericalError):
    """Explicit scheme coefficients violate r <= 1, u >= 0, v >= 0."""


class SingularSystemError(NumericalError):
    """A (near-)zero pivot was met during elimination."""


class DefaultOccurred(ValueError):
    """Firm value is already at or below the default barrier."""
