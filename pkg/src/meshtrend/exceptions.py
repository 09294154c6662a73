"""Custom exceptions for meshtrend."""

from typing import Any


class MeshTrendError(Exception):
    """Base exception for pipeline errors."""


class ConfigError(MeshTrendError):
    """Raised when a run configuration is invalid."""


# Vocabulary


class VocabularyError(MeshTrendError):
    """Base exception for thesaurus loading and selection."""


class MalformedRecordError(VocabularyError):
    """Raised when a term record is missing required fields or breaks an invariant."""


class DuplicateTermError(VocabularyError):
    """Raised when a ui occurs twice in a stream or in two new-term lists."""


class UnknownTermError(VocabularyError):
    """Raised when a new-term list references a ui absent from the vocabulary."""


class NoCategoryError(VocabularyError):
    """Raised when a term carries no tree numbers."""


class UnknownCohortError(VocabularyError):
    """Raised when a cohort year has no new-term list."""


# Corpus


class CorpusError(MeshTrendError):
    """Base exception for corpus access."""


class CorpusFormatError(CorpusError):
    """Raised when a fixture corpus line cannot be parsed."""


class DuplicateArticleError(CorpusError):
    """Raised when a pmid occurs twice in a fixture corpus."""


class BackendError(CorpusError):
    """Raised when the live backend fails after retries or answers with an error status."""


class UnparsableResponseError(CorpusError):
    """Raised when the live backend answers with a body that carries no count."""


class RateBudgetExceededError(CorpusError):
    """Raised when a live run would exceed its configured request budget."""


# Trend


class TrendError(MeshTrendError):
    """Base exception for trend classification."""


class EmptySeriesError(TrendError):
    """Raised when a popularity series has no years."""


class EmptyCohortError(TrendError):
    """Raised when quartiles are requested for an empty cohort."""


# Profile


class ProfileError(MeshTrendError):
    """Base exception for topic profiling."""


class MissingClinicalYearError(ProfileError):
    """Raised when a lag is requested for a term without clinical-trial evidence."""


class LagOutOfRangeError(ProfileError):
    """Raised when a clinical lag falls outside every staging bracket."""


class NotAnOrganismError(ProfileError):
    """Raised when pathogen classification is requested for a non-Organisms term."""


# Statistics


class StatisticsError(MeshTrendError):
    """Raised on domain violations and degenerate inputs to statistical routines."""


# Modeling


class ModelError(MeshTrendError):
    """Base exception for model fitting and evaluation."""


class SingleClassError(ModelError):
    """Raised when the labels contain only one class."""


class NonConvergenceError(ModelError):
    """Raised when IRLS cannot continue, e.g. on a rank-deficient design."""


class SeparationError(ModelError):
    """Raised when coefficients diverge because the data are (quasi-)separated."""

    def __init__(self, message: str, coefficients: Any = None):
        super().__init__(message)
        self.coefficients = coefficients


class DimensionMismatchError(ModelError):
    """Raised when a feature vector does not match the model."""


class InsufficientDataError(ModelError):
    """Raised when there are too few rows or too few examples per class."""
