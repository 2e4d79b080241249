"""Exception types shared across the package."""


class SpinmechError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SpinmechError):
    """Invalid or inconsistent configuration input."""


class BroadbandInjectionSingular(SpinmechError):
    """Broadband spin noise cannot be injected through a lossless link.

    The nu/(1-nu) loss-port trick diverges as the intersystem
    transmission approaches one while flat spin noise is present.
    """


class IntegrationNotConverged(SpinmechError):
    """Frequency-grid refinement did not stabilise the integral."""


class AliasingError(SpinmechError):
    """Sampling rate too low for the spectral content being processed."""


class IllConditioned(SpinmechError):
    """Toeplitz system is numerically singular (reflection coefficient at unity)."""


class NotPSD(SpinmechError):
    """A covariance matrix that must be positive semidefinite is not."""


class LengthMismatch(SpinmechError):
    """Record and filter sampling or lengths are incompatible."""


class RecordTooShort(SpinmechError):
    """Time record too short for the requested segmentation."""


class NonFinite(SpinmechError):
    """Model produced a non-finite or non-positive quantity."""


class DegenerateEnsemble(SpinmechError):
    """All MCMC walkers collapsed onto a single point."""


class RegimeViolation(SpinmechError):
    """Closed-form expression evaluated outside its regime of validity."""
