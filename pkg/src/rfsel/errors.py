"""Exception hierarchy shared across the package."""


class RFSelError(Exception):
    """Base class for all package errors."""


class ModelError(RFSelError, ValueError):
    """Input violates a modelling precondition (shape, range, Hermitian flag)."""


class NumericError(RFSelError, ArithmeticError):
    """A numerical kernel failed (non-convergence, indefinite matrix, ...)."""


class SingularUpdateError(NumericError):
    """A rank-one or Schur-complement update hit a near-zero pivot."""


class CapacityError(RFSelError):
    """Requested enumeration exceeds the configured combinatorial cap."""


class ConfigError(RFSelError, ValueError):
    """Experiment configuration is malformed."""
