"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class NumericalError(ArithmeticError):
    """A matrix needed by the model is singular or not positive definite.

    Parameters
    ----------
    message : str
        Human readable description.
    matrix : str, optional
        Name of the offending matrix (e.g. ``"Re(Z_in)"``).
    condition : float, optional
        Estimated 2-norm condition number, when it was computed.
    min_eigenvalue : float, optional
        Smallest eigenvalue, for Hermitian matrices.
    """

    def __init__(self, message, matrix=None, condition=None, min_eigenvalue=None):
        super().__init__(message)
        self.matrix = matrix
        self.condition = condition
        self.min_eigenvalue = min_eigenvalue


class ConfigError(ValueError):
    """A sweep configuration document is malformed or out of range."""
