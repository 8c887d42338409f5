"""Exception and warning types shared across the package."""


class NsclabError(Exception):
    """Base class for all package-specific errors."""


class InvalidParams(NsclabError):
    """Physical parameter set violates a model constraint."""


class VacuumBreach(NsclabError):
    """Density (or 1+n) dropped to or below the admissible floor."""


class NegativeTemperature(NsclabError):
    """Temperature (or its scaled perturbation factor) is non-positive."""


class Degenerate(NsclabError):
    """Polynomial degenerates (leading coefficient vanishes)."""


class BoundViolation(NsclabError):
    """A spectral gap came out non-positive; wrong parameters or sign convention."""


class EigenvalueCollision(NsclabError):
    """Two dispersion roots are too close for the explicit propagator formulas."""


class OutOfBand(NsclabError):
    """Frequency outside the band where the requested approximation is valid."""


class QuadratureFailure(NsclabError):
    """Adaptive quadrature exhausted its refinement budget before the tolerance."""


class DivergentIntegral(NsclabError):
    """Integrand is non-integrable for the given data class."""


class NonPositiveValue(NsclabError):
    """Log-log fitting requested on data with non-positive values."""


class WindowTooSmall(NsclabError):
    """Fit window has too few points or spans too little time."""


class CFLViolation(NsclabError):
    """Time step exceeds the advective CFL bound."""


class AmplitudeTooLarge(NsclabError):
    """Initial perturbation too large for the positivity margin."""


class ConfigError(NsclabError):
    """Malformed experiment configuration."""


class TrackingAmbiguityWarning(UserWarning):
    """Two eigenvalue branches approached within resolution during tracking."""
