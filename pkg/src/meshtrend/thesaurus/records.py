"""Vocabulary snapshot: term records, new-term lists and structural facts."""

import json
import logging
from collections import defaultdict
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Any

from ..exceptions import (
    DuplicateTermError,
    MalformedRecordError,
    NoCategoryError,
    UnknownCohortError,
    UnknownTermError,
)

logger = logging.getLogger(__name__)

CATEGORY_LETTERS = frozenset("ABCDEFGHIJKLMN") | frozenset({"V", "Z"})
NON_SUBJECT_CATEGORIES = frozenset({"V", "Z"})

CATEGORY_NAMES = {
    "A": "Anatomy",
    "B": "Organisms",
    "C": "Diseases",
    "D": "Chemicals and Drugs",
    "E": "Analytical, Diagnostic and Therapeutic Techniques, and Equipment",
    "F": "Psychiatry and Psychology",
    "G": "Phenomena and Processes",
    "H": "Disciplines and Occupations",
    "I": "Anthropology, Education, Sociology, and Social Phenomena",
    "J": "Technology, Industry, and Agriculture",
    "K": "Humanities",
    "L": "Information Science",
    "M": "Named Groups",
    "N": "Health Care",
    "V": "Publication Characteristics",
    "Z": "Geographicals",
}

REQUIRED_FIELDS = ("ui", "label", "year_added")


@dataclass(frozen=True)
class TermRecord:
    """One vocabulary concept."""

    ui: str
    label: str
    year_added: int
    tree_numbers: tuple[str, ...] = ()
    annotation: str = ""
    scope_note: str = ""
    previously_indexing: tuple[str, ...] = ()
    deleted: bool = False
    deleted_year: int | None = None

    def __post_init__(self):
        if not self.ui:
            raise MalformedRecordError("Term record has an empty ui")
        for tree_number in self.tree_numbers:
            if not tree_number or tree_number[0] not in CATEGORY_LETTERS:
                raise MalformedRecordError(
                    f"Term {self.ui}: tree number {tree_number!r} does not start with a "
                    f"category letter",
                )
        if self.deleted_year is not None:
            if not self.deleted:
                raise MalformedRecordError(
                    f"Term {self.ui}: deleted_year set but the term is not deleted",
                )
            if self.deleted_year < self.year_added:
                raise MalformedRecordError(
                    f"Term {self.ui}: deleted in {self.deleted_year} before it was added "
                    f"in {self.year_added}",
                )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "TermRecord":
        """Build a record from one decoded JSONL object."""
        missing = [name for name in REQUIRED_FIELDS if data.get(name) in (None, "")]
        if missing:
            raise MalformedRecordError(f"Term record missing {', '.join(missing)}")

        try:
            year_added = int(data["year_added"])
            deleted_year = data.get("deleted_year")
            return cls(
                ui=str(data["ui"]),
                label=str(data["label"]),
                year_added=year_added,
                tree_numbers=tuple(data.get("tree_numbers") or ()),
                annotation=data.get("annotation") or "",
                scope_note=data.get("scope_note") or "",
                previously_indexing=tuple(data.get("previously_indexing") or ()),
                deleted=bool(data.get("deleted", False)),
                deleted_year=int(deleted_year) if deleted_year is not None else None,
            )
        except (TypeError, ValueError) as e:
            raise MalformedRecordError(f"Term record {data.get('ui')!r}: {e}")


@dataclass(frozen=True)
class VocabularyDB:
    """Immutable thesaurus snapshot plus the yearly new-term lists."""

    terms: Mapping[str, TermRecord]
    new_terms_by_year: Mapping[int, tuple[str, ...]]
    _children: Mapping[str, tuple[TermRecord, ...]] = field(
        init=False,
        repr=False,
        compare=False,
    )

    def __post_init__(self):
        object.__setattr__(self, "terms", MappingProxyType(dict(self.terms)))
        object.__setattr__(
            self,
            "new_terms_by_year",
            MappingProxyType({int(y): tuple(uis) for y, uis in self.new_terms_by_year.items()}),
        )

        children: dict[str, list[TermRecord]] = defaultdict(list)
        for term in self.terms.values():
            for tree_number in term.tree_numbers:
                if "." in tree_number:
                    parent, _ = tree_number.rsplit(".", 1)
                    children[parent].append(term)
        object.__setattr__(
            self,
            "_children",
            MappingProxyType({k: tuple(v) for k, v in children.items()}),
        )

    def __contains__(self, ui: object) -> bool:
        return ui in self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[TermRecord]:
        return iter(self.terms.values())

    def get(self, ui: str) -> TermRecord | None:
        return self.terms.get(ui)

    @property
    def years(self) -> list[int]:
        return sorted(self.new_terms_by_year)

    def candidates(self, year: int) -> tuple[str, ...]:
        """Return the new-term list of one cohort year."""
        if year not in self.new_terms_by_year:
            raise UnknownCohortError(f"No new-term list for cohort year {year}")
        return self.new_terms_by_year[year]

    def children_of(self, tree_number: str) -> tuple[TermRecord, ...]:
        """Return the terms holding a direct child position of ``tree_number``."""
        return self._children.get(tree_number, ())


def load_vocabulary(
    term_stream: Iterable[Mapping[str, Any] | str],
    new_term_lists: Mapping[Any, Sequence[str]],
    strict: bool = True,
) -> VocabularyDB:
    """Build a vocabulary from term records and yearly new-term lists.

    Args:
        term_stream: Decoded records or raw JSONL lines (blank lines are skipped)
        new_term_lists: Map of year (int or str) to the ui list added that year
        strict: Reject new-term entries whose ui has no record

    Returns:
        A VocabularyDB satisfying its invariants
    """
    terms: dict[str, TermRecord] = {}

    for line_number, item in enumerate(term_stream, start=1):
        if isinstance(item, str):
            if not item.strip():
                continue
            try:
                item = json.loads(item)
            except json.JSONDecodeError as e:
                raise MalformedRecordError(f"Line {line_number}: invalid JSON ({e.msg})")
        if not isinstance(item, Mapping):
            raise MalformedRecordError(f"Line {line_number}: record is not a JSON object")

        try:
            record = TermRecord.from_dict(item)
        except MalformedRecordError as e:
            raise MalformedRecordError(f"Line {line_number}: {e}")

        if record.ui in terms:
            raise DuplicateTermError(f"Line {line_number}: duplicate ui {record.ui}")
        terms[record.ui] = record

    by_year: dict[int, tuple[str, ...]] = {}
    seen: dict[str, int] = {}
    for raw_year, uis in new_term_lists.items():
        try:
            year = int(raw_year)
        except (TypeError, ValueError):
            raise MalformedRecordError(f"New-term list key {raw_year!r} is not a year")

        for ui in uis:
            if ui in seen:
                raise DuplicateTermError(
                    f"ui {ui} listed as new in both {seen[ui]} and {year}",
                )
            seen[ui] = year
            if ui not in terms:
                if strict:
                    raise UnknownTermError(f"New-term list {year} references unknown ui {ui}")
                logger.warning(f"New-term list {year} references unknown ui {ui}")
        by_year[year] = tuple(uis)

    logger.debug(f"Loaded {len(terms)} terms and {len(seen)} new-term entries")
    return VocabularyDB(terms=terms, new_terms_by_year=by_year)


def read_vocabulary(
    vocabulary_path: str | Path,
    new_terms_path: str | Path,
    strict: bool = True,
) -> VocabularyDB:
    """Load a vocabulary from a JSONL record file and a JSON new-term map."""
    vocabulary_path = Path(vocabulary_path)
    new_terms_path = Path(new_terms_path)

    for path in (vocabulary_path, new_terms_path):
        if not path.exists():
            raise FileNotFoundError(f"File not found: {path}")

    try:
        new_term_lists = json.loads(new_terms_path.read_text(encoding="utf-8") or "{}")
    except json.JSONDecodeError as e:
        raise MalformedRecordError(f"{new_terms_path}: invalid JSON ({e.msg})")

    with open(vocabulary_path, encoding="utf-8") as f:
        db = load_vocabulary(f, new_term_lists, strict=strict)

    logger.info(f"Loaded vocabulary {vocabulary_path} ({len(db)} terms, {len(db.years)} cohorts)")
    return db


def broad_categories(term: TermRecord) -> frozenset[str]:
    """Return the category letters of a term (first letter of each tree number)."""
    if not term.tree_numbers:
        raise NoCategoryError(f"Term {term.ui} has no tree numbers")
    return frozenset(tree_number[0] for tree_number in term.tree_numbers)


def subject_categories(term: TermRecord) -> frozenset[str]:
    """Return the categories that characterize subject content (V and Z dropped)."""
    return broad_categories(term) - NON_SUBJECT_CATEGORIES


def has_narrower_at_inclusion(db: VocabularyDB, term: TermRecord) -> bool:
    """Check whether a term had a direct child when it was added.

    Only terms added no later than ``term`` count, so the answer reflects the
    vocabulary as it stood in the inclusion year.
    """
    for tree_number in term.tree_numbers:
        for child in db.children_of(tree_number):
            if child.ui != term.ui and child.year_added <= term.year_added:
                return True
    return False
