"""Exception types shared across the package."""


class MonoflowError(Exception):
    """Base class for all package-specific errors."""


class ResolutionError(MonoflowError):
    """Requested quadrature resolution is below the supported minimum."""


class SingularOriginError(MonoflowError):
    """Ball grid was requested with an inner radius that is not positive."""


class DomainError(MonoflowError):
    """Evaluation point or radius lies outside a field's annulus of validity."""


class EvaluationError(MonoflowError):
    """A field produced non-finite values at quadrature nodes."""


class TangencyError(MonoflowError):
    """A spherical field marked tangential has a radial component."""


class SupportError(MonoflowError):
    """Test function is not compactly supported inside the integration domain."""


class DegenerateError(MonoflowError):
    """Quantity is undefined because a normalising energy vanishes."""


class ConvergenceError(MonoflowError):
    """Iterative solver failed to reach the requested residual."""


class PremiseViolated(MonoflowError):
    """Recurrence parameters do not satisfy the smallness hypothesis."""


class ConfigError(MonoflowError):
    """Scenario configuration is malformed or names an unknown entity."""


class IoError(MonoflowError):
    """Report or grid data could not be written or read."""


class NonIntegrableWarning(UserWarning):
    """Sphere covector field fails a closedness or radial-consistency check."""
