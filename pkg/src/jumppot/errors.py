"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter is outside its admissible range."""


class DomainError(ValueError):
    """A point lies outside the domain where an operation is defined."""


class PreconditionError(ValueError):
    """An operation's geometric or analytic precondition is violated."""


class AdmissibilityError(ValueError):
    """A requested constant is not attainable (e.g. above the observed supremum)."""


class QuadratureFailureError(RuntimeError):
    """Numerical quadrature failed to converge; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class GeometryError(RuntimeError):
    """Base class for geometric solver failures."""


class AmbiguityError(GeometryError):
    """Nearest boundary point is not provably unique at this location."""


class DegeneratePointError(GeometryError):
    """The query point is degenerate (e.g. the center of a ball)."""


class GeometryFailureError(GeometryError):
    """A geometric solve did not converge or failed its certificate."""


class UnsupportedDomainError(ValueError):
    """The requested domain variant is not supported by this oracle."""


class ConfigurationError(ValueError):
    """An experiment configuration is malformed or unsupported."""
