"""Exception types shared across the package."""


class ResourceError(RuntimeError):
    """Requested work exceeds a configured budget."""

    def __init__(self, message, estimated_cost=None, budget=None):
        super().__init__(message)
        self.estimated_cost = estimated_cost
        self.budget = budget


class PrecisionDeficitError(ValueError):
    """Input does not carry enough digits for the requested certified precision."""

    def __init__(self, message, required_digits=None):
        super().__init__(message)
        self.required_digits = required_digits


class IndeterminateError(ArithmeticError):
    """Interval evaluation could not decide a comparison at the maximum precision."""
