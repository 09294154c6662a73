"""Term selection: the exclusion rules that keep only genuinely new concepts."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Any

from ..corpus.base import CorpusProvider
from .records import TermRecord, VocabularyDB, subject_categories

logger = logging.getLogger(__name__)

PREEXISTING_WINDOW_YEARS = 5


class ExclusionReason(str, Enum):
    """Why a candidate was dropped; members are listed in rule order."""

    DELETED = "Deleted"
    PREVIOUSLY_INDEXED = "PreviouslyIndexed"
    NON_SUBJECT_CATEGORY = "NonSubjectCategory"
    PREEXISTING_CONCEPT = "PreexistingConcept"


@dataclass(frozen=True)
class SelectionResult:
    """Disposition of every candidate of one cohort year."""

    year: int
    selected: tuple[str, ...]
    excluded: tuple[tuple[str, ExclusionReason], ...]

    @property
    def candidate_count(self) -> int:
        return len(self.selected) + len(self.excluded)

    def reason_counts(self) -> dict[ExclusionReason, int]:
        counts = dict.fromkeys(ExclusionReason, 0)
        for _, reason in self.excluded:
            counts[reason] += 1
        return counts

    def rows(self, db: VocabularyDB) -> list[dict[str, Any]]:
        """Flatten to ui,label,disposition,reason rows in candidate order."""
        reasons = dict(self.excluded)
        selected = set(self.selected)
        rows = []
        for ui in db.candidates(self.year):
            term = db.get(ui)
            label = term.label if term else ""
            if ui in selected:
                rows.append({"ui": ui, "label": label, "disposition": "selected", "reason": ""})
            else:
                rows.append(
                    {
                        "ui": ui,
                        "label": label,
                        "disposition": "excluded",
                        "reason": reasons[ui].value,
                    },
                )
        return rows


def _structural_exclusion(term: TermRecord | None) -> ExclusionReason | None:
    """Apply rules (1)-(3), which need only the vocabulary."""
    if term is None or term.deleted:
        return ExclusionReason.DELETED
    if term.previously_indexing:
        return ExclusionReason.PREVIOUSLY_INDEXED
    if not term.tree_numbers or not subject_categories(term):
        return ExclusionReason.NON_SUBJECT_CATEGORY
    return None


def select_terms(
    db: VocabularyDB,
    corpus: CorpusProvider,
    year: int,
    max_workers: int = 1,
    window_years: int = PREEXISTING_WINDOW_YEARS,
) -> SelectionResult:
    """Select the genuinely new terms of one cohort year.

    Rules run in order and the first match is recorded: deleted, previously
    indexed, non-subject categories only, first indexed article more than
    ``window_years`` before the term was added. Terms never indexed are kept.

    Args:
        db: Vocabulary snapshot
        corpus: Provider answering first-indexed-year queries
        year: Cohort year
        max_workers: Threads used for corpus lookups

    Returns:
        SelectionResult partitioning the cohort's candidates
    """
    candidates = db.candidates(year)
    dispositions: dict[str, ExclusionReason | None] = {}
    pending: list[TermRecord] = []

    for ui in candidates:
        term = db.get(ui)
        reason = _structural_exclusion(term)
        if reason is None and term is not None:
            pending.append(term)
        else:
            dispositions[ui] = reason

    def first_year(term: TermRecord) -> int | None:
        return corpus.first_indexed_year(term.ui)

    # A provider failure propagates out of map() and no result is built.
    if max_workers > 1 and len(pending) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            first_years = list(executor.map(first_year, pending))
    else:
        first_years = [first_year(term) for term in pending]

    for term, first in zip(pending, first_years):
        if first is not None and first < term.year_added - window_years:
            dispositions[term.ui] = ExclusionReason.PREEXISTING_CONCEPT
        else:
            dispositions[term.ui] = None

    selected = tuple(ui for ui in candidates if dispositions[ui] is None)
    excluded = tuple(
        (ui, reason) for ui in candidates if (reason := dispositions[ui]) is not None
    )

    logger.info(f"Cohort {year}: {len(selected)} of {len(candidates)} candidates selected")
    return SelectionResult(year=year, selected=selected, excluded=excluded)
