"""Exception types raised across the package."""


class InvalidDimensionError(ValueError):
    """Matrix sizes are inconsistent or violate a divisibility requirement."""


class InvalidParameterError(ValueError):
    """Model parameters describe an infeasible instance."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class IllConditionedError(ArithmeticError):
    """A linear system is too close to singular to be solved reliably."""

    def __init__(self, message, sigma_min=None):
        super().__init__(message)
        self.sigma_min = sigma_min
