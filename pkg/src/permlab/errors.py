"""Exception hierarchy shared across the workbench."""


class PermlabError(Exception):
    """Base class for all workbench errors."""


class NonFiniteError(PermlabError):
    """A computation produced NaN or +/-inf from supposedly clean inputs."""


class NonPenetrantError(PermlabError):
    """Transport below detection: the permeability log argument is <= 0."""


class EmptyInputError(PermlabError):
    """An aggregate was requested over zero rows."""


class SmilesSyntaxError(PermlabError):
    """SMILES text could not be parsed; carries the offending position."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class EmptyAfterDesaltError(PermlabError):
    """Every component of the molecule was stripped as a salt."""


class AcyclicError(PermlabError):
    """Scaffold requested for a molecule without any ring."""


class WidthMismatchError(PermlabError):
    """Fingerprints of different folded widths were combined."""


class KTooLargeError(PermlabError):
    """A selection of k items was requested from fewer candidates."""


class SchemaError(PermlabError):
    """A table is missing required columns or carries unexpected ones."""


class ConfigError(PermlabError):
    """A run configuration is malformed or references missing resources."""


class TableParseError(PermlabError):
    """A cell failed to parse; carries row/column location in the message."""


class ZeroVarianceError(PermlabError):
    """A column has zero variance and cannot be standardized."""


class DegenerateInputError(PermlabError):
    """Input matrix unusable (too few rows or no variance at all)."""


class DimensionMismatchError(PermlabError):
    """Feature dimension does not match the fitted model or transformer."""


class RankDeficientError(PermlabError):
    """A latent direction collapsed below tolerance during decomposition."""


class ConstantTargetError(PermlabError):
    """Correlation/R^2 undefined because the target has zero variance."""


class TooFewCompoundsError(PermlabError):
    """Fewer compounds than folds."""


class AllTrialsFailedError(PermlabError):
    """No successful trial available for model selection."""


class DegenerateTargetError(PermlabError):
    """Feature selection target is constant."""


class LeakageError(PermlabError):
    """Test-fold compounds leaked into a training input."""
