"""Direction and diffuseness estimation for simulated microphone arrays."""

from .errors import (
    ConfigError,
    DomainError,
    FitError,
    FormatError,
    TfDiffuseError,
    TruncatedFileError,
    UndefinedFieldError,
    WrongModelError,
)
from .medium import AIR, Medium

__version__ = "0.1.0"

__all__ = [
    "AIR",
    "ConfigError",
    "DomainError",
    "FitError",
    "FormatError",
    "Medium",
    "TfDiffuseError",
    "TruncatedFileError",
    "UndefinedFieldError",
    "WrongModelError",
]
