"""mimo-detlab: link-level MIMO detection laboratory."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DetectionError,
    FactorizationError,
    InputError,
    MimoDetLabError,
    NumericError,
    ReductionError,
)

__all__ = [
    "__version__",
    "MimoDetLabError",
    "ConfigurationError",
    "InputError",
    "NumericError",
    "FactorizationError",
    "ReductionError",
    "DetectionError",
]
