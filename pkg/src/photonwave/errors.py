"""Exception hierarchy shared across the package."""


class PhotonWaveError(Exception):
    """Base class for all package errors."""


class ValidationError(PhotonWaveError, ValueError):
    """Input data has the wrong shape, type or value range."""


class ConstraintError(PhotonWaveError, ValueError):
    """A field violates a structural constraint (e.g. trace-free blocks)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PreconditionError(PhotonWaveError, ValueError):
    """An operation was called with data that fails its precondition check."""


class NullTotalCurrent(PhotonWaveError, ArithmeticError):
    """The conserved four-vector pi is null (or numerically close to null).

    The current j = tau X needs X = pi/|pi|^2, which does not exist for null pi.
    The null-pi prescription (X = pi, null current) is not implemented.
    """


class NodeRegionError(PhotonWaveError, ArithmeticError):
    """The probability density is below the node threshold at the query point."""


class SnapshotError(PhotonWaveError, OSError):
    """Base class for snapshot file I/O errors."""


class BadMagic(SnapshotError):
    pass


class HeaderError(SnapshotError):
    pass


class TruncatedSnapshot(SnapshotError):
    pass


class PayloadLengthMismatch(SnapshotError):
    pass


class ConfigError(PhotonWaveError, ValueError):
    """Run configuration failed validation; ``pointer`` is a JSON pointer."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
