"""Exception types shared across the package."""


class ErgoboundError(Exception):
    """Base class for every error raised by this package."""


class NonConvergence(ErgoboundError):
    """A dense iterative routine failed to meet its residual contract."""


class NotSchurStable(ErgoboundError):
    """The spectral radius is not strictly below one."""


class KappaBelowThreshold(ErgoboundError):
    """A fixed scaling parameter does not exceed the admissibility threshold."""


class NotSymmetric(ErgoboundError):
    """A matrix expected to be symmetric is not, beyond tolerance."""


class NotPSD(ErgoboundError):
    """A matrix expected to be positive semidefinite is not, beyond tolerance."""


class EmptyCoefficients(ErgoboundError):
    """An autoregressive coefficient list is empty."""


class OrderViolation(ErgoboundError):
    """Moving-average order must satisfy 1 <= q <= p."""


class MomentUnavailable(ErgoboundError):
    """The requested absolute moment of the driving noise is infinite."""


class SingularStationaryCovariance(ErgoboundError):
    """The stationary covariance is singular; Gaussian-flavor bounds do not apply."""


class NotDiagonalizable(ErgoboundError):
    """An eigenvector basis with acceptable conditioning was not found."""


class OutOfRegime(ErgoboundError):
    """The time step is below the validity threshold of an asymptotic estimate."""


class ZeroEigenvalue(ErgoboundError):
    """Jordan-power estimates require a nonzero eigenvalue."""


class DimensionMismatch(ErgoboundError):
    """Operands have incompatible dimensions."""


class UnequalSampleSizes(ErgoboundError):
    """Empirical quantile distances require equally sized samples."""
