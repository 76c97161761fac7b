"""Exception hierarchy shared by all gabfock modules.

Split along the CLI exit-code boundary: ConfigError maps to exit code 3
(bad parameters), NumericError to exit code 2 (a computation that could
not be certified or did not converge).
"""


class GabfockError(Exception):
    """Base class for everything raised on purpose by this package."""


class ConfigError(GabfockError):
    """Invalid parameters, config-file entries, or regime violations."""


class RegimeError(ConfigError):
    """Parameter outside the regime where a construction is defined."""


class RadiusTooSmallError(ConfigError):
    """Truncation radius too small for the requested basis size."""


class NumericError(GabfockError):
    """A numeric routine failed to converge or certify its result."""


class ExtentTooSmallError(NumericError):
    """Line quadrature extent does not cover the integrand's mass."""


class EnvelopeMissingError(NumericError):
    """No usable decay envelope, so a tail cannot be certified."""


class TailNotCertifiedError(NumericError):
    """Lattice or integral tail estimate exceeds the tolerance."""


class NoIntegerInRangeError(NumericError):
    """The admissible radius interval contains no integer zero count."""


class AreaMismatchError(NumericError):
    """Rasterized area disagrees with the exact area (grid too coarse)."""


class RimNotNegligibleError(NumericError):
    """Integrand not negligible at the outer rim of a planar grid."""


class DivergenceError(NumericError):
    """Integrand still growing at the outer radius of a planar grid."""


class OutOfRegimeError(NumericError):
    """Evaluation point too close to a truncation boundary to trust."""


class ConvergenceError(NumericError):
    """Iteration hit its cap before meeting the residual tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
