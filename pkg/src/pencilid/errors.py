"""Exception hierarchy shared across the package."""


class PencilIdError(Exception):
    """Base class for all package errors."""


class DimensionError(PencilIdError):
    """Matrix or signal dimensions are inconsistent."""


class FormatError(PencilIdError):
    """A persisted file is malformed or internally inconsistent."""


class NumericalError(PencilIdError):
    """Base class for failures of numerical nature (exit code 3 in the CLI)."""


class SingularE(NumericalError):
    """The descriptor matrix E is singular or too ill-conditioned to invert."""


class PoleHit(NumericalError):
    """A transfer-function evaluation point coincides with a pole."""

    def __init__(self, z):
        self.z = z
        super().__init__(f"evaluation point {z} hits a pole (solve failed)")


class OutOfRange(PencilIdError):
    """Requested window does not fit inside the available samples."""


class RankDeficientRegressor(NumericalError):
    """Least-squares regression matrix does not have full column rank."""


class DegenerateDenominator(PencilIdError):
    """A normalizing denominator is zero or undefined."""


class InsufficientLags(PencilIdError):
    """Cross-correlation sequence carries no negative lags."""


class NoValidN(NumericalError):
    """No horizon length yields a full-row-rank data matrix."""


class NotPersistentlyExciting(NumericalError):
    """The stacked input data matrix is rank deficient."""


class IllConditionedSaddle(NumericalError):
    """The saddle-point system of the signal-matrix estimator is numerically
    singular; a larger noise-variance floor usually repairs it."""


class PointCollision(PencilIdError):
    """Two interpolation points on opposite sides of the partition coincide."""

    def __init__(self, i, j):
        self.i, self.j = i, j
        super().__init__(f"right point {i} collides with left point {j}")


class OrderError(PencilIdError):
    """Requested reduction order is outside the feasible range."""


class SpectralDivisionError(NumericalError):
    """Input auto-spectrum vanishes at a frequency bin."""


class GridError(PencilIdError):
    """Frequency grid violates its constraints (ordering or Nyquist)."""


class DegenerateReference(PencilIdError):
    """Reference sequence has zero energy; the metric is undefined."""


class MethodUnsupported(PencilIdError):
    """The selected method does not support the given data (e.g. MIMO)."""
