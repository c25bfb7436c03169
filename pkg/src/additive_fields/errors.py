"""Exception types shared across the package."""


class AdditiveFieldError(Exception):
    """Base class for all package errors."""


class InvalidGrid(AdditiveFieldError):
    """Grid has fewer than two points or non-positive spacing."""


class NonEmbeddable(AdditiveFieldError):
    """Kernel/grid pair whose circulant extension has too much negative
    eigenvalue mass to be sampled exactly."""


class MixedInputs(AdditiveFieldError):
    """Paths with differing grids or kernels passed to a reduction."""


class OutOfBounds(AdditiveFieldError):
    """Index or window outside the underlying grids."""


class EmptyMask(AdditiveFieldError):
    """Operation on a mask with no cells."""


class EmptySamples(AdditiveFieldError):
    """Statistic requested on an empty sample set."""


class DomainError(AdditiveFieldError):
    """Argument outside the mathematical domain of the operation."""


class IntervalOutOfRange(AdditiveFieldError):
    """Requested time interval not covered by the path's grid."""


class IoFailure(AdditiveFieldError):
    """File output could not be written."""


class ConfigError(AdditiveFieldError):
    """Malformed or inconsistent experiment configuration."""


class CertificateViolation(AdditiveFieldError):
    """A certificate claimed a geometric event that does not hold on the
    sample. This is a hard failure: it falsifies the implication the
    certificate machinery is supposed to guarantee."""
