"""Vocabulary snapshots and term selection."""

from .records import (
    CATEGORY_NAMES,
    TermRecord,
    VocabularyDB,
    broad_categories,
    has_narrower_at_inclusion,
    load_vocabulary,
    read_vocabulary,
    subject_categories,
)
from .selection import ExclusionReason, SelectionResult, select_terms

__all__ = [
    "CATEGORY_NAMES",
    "ExclusionReason",
    "SelectionResult",
    "TermRecord",
    "VocabularyDB",
    "broad_categories",
    "has_narrower_at_inclusion",
    "load_vocabulary",
    "read_vocabulary",
    "select_terms",
    "subject_categories",
]
