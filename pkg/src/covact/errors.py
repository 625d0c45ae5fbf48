"""Exception types shared across the package."""


class CovactError(Exception):
    """Base class for all package errors."""


class ParameterError(CovactError, ValueError):
    """Invalid argument or configuration value."""


class SingularCovarianceError(CovactError, RuntimeError):
    """A covariance matrix required to be positive definite is singular."""


class NumericalError(CovactError, RuntimeError):
    """A numerical routine failed to reach its required accuracy."""
