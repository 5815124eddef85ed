"""Exception types shared across the package."""


class ValidationError(ValueError):
    """An input violated a documented precondition.

    ``field`` names the offending parameter so front ends can point at it.
    """

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericError(ArithmeticError):
    """A numerical routine failed or produced output outside tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        self.residual = residual
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)
