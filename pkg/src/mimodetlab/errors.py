"""Error types shared across the package."""


class MimoDetLabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(MimoDetLabError, ValueError):
    """Invalid parameter or unsupported configuration."""


class InputError(MimoDetLabError, ValueError):
    """Malformed runtime input (wrong length, non-finite values)."""


class NumericError(MimoDetLabError, ArithmeticError):
    """Numerical failure (loss of positive semidefiniteness, overflow)."""


class FactorizationError(MimoDetLabError):
    """QR factorization failure (rank deficiency)."""


class ReductionError(MimoDetLabError):
    """Lattice reduction failure. Carries partial factors when available."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DetectionError(MimoDetLabError):
    """Detector-level failure (singular system, invalid transform)."""
