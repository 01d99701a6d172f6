"""Exception types raised across the package."""


class TfDiffuseError(Exception):
    """Base class for all package errors."""


class DomainError(TfDiffuseError, ValueError):
    """Input outside the domain of an operation."""


class UndefinedFieldError(DomainError):
    """Quantity undefined for the given field (zero energy, zero velocity, ...)."""


class WrongModelError(DomainError):
    """Synthesis model does not match the array (e.g. free-field on a baffled array)."""


class FitError(TfDiffuseError, ValueError):
    """Least-squares directivity fit is ill-posed."""


class FormatError(TfDiffuseError, ValueError):
    """Unsupported or malformed file."""


class ConfigError(TfDiffuseError, ValueError):
    """Invalid or conflicting run configuration."""


class TruncatedFileError(TfDiffuseError, OSError):
    """File ends before the length announced in its header."""
