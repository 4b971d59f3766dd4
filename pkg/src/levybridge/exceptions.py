"""Exception hierarchy for levybridge."""


class LevyBridgeError(Exception):
    """Base class for all errors raised by the package."""


class ModelRejectedError(LevyBridgeError, ValueError):
    """Model parameters fail the integrability or regularity catalog rules."""


class UnsupportedModelError(LevyBridgeError):
    """The requested operation has no implementation for this model kind."""


class QuadratureError(LevyBridgeError):
    """A numerical quadrature did not converge."""


class GridCoverageError(LevyBridgeError):
    """A density grid does not cover enough probability mass."""


class InversionAccuracyError(LevyBridgeError):
    """Fourier inversion produced negative lobes larger than the clamp tolerance."""


class GridMismatchError(LevyBridgeError, ValueError):
    """Density grids passed together have incompatible horizons or spacings."""


class RequiresDensityError(LevyBridgeError):
    """An inverse-CDF sampler was asked for without a density table."""


class BridgeDegeneracyError(LevyBridgeError):
    """A bridge normalizing kernel fell below the underflow floor."""


class GridAlignmentError(LevyBridgeError, ValueError):
    """A time argument does not fall on the path's time grid."""


class NotABridgeError(LevyBridgeError, ValueError):
    """The path does not end at its starting value."""


class RequiresMonteCarloError(UnsupportedModelError):
    """No closed-form renewal function exists; use the Monte Carlo estimator."""


class InsufficientSampleError(LevyBridgeError):
    """Too few samples or events for a reliable estimate."""


class SuspiciousEstimateError(LevyBridgeError):
    """An estimate contradicts a property that must hold (e.g. strict positivity)."""


class InconsistencyError(LevyBridgeError):
    """Two estimates of the same quantity disagree beyond their joint error."""


class ManifestError(LevyBridgeError, ValueError):
    """Experiment manifest or model config is invalid."""
