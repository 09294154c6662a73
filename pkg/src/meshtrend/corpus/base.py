"""Corpus types and the provider interface shared by fixture and live backends."""

from abc import ABC, abstractmethod
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any, ClassVar, NamedTuple

from ..exceptions import CorpusFormatError

CLINICAL_TRIAL = "Clinical Trial"
DEFAULT_HORIZON_YEAR = 2019


class Heading(NamedTuple):
    """One indexing heading of an article."""

    ui: str
    major: bool


@dataclass(frozen=True)
class Article:
    """A bibliographic record reduced to what the counts need."""

    pmid: str
    year: int
    pub_types: frozenset[str]
    headings: tuple[Heading, ...]

    def __post_init__(self):
        if not self.pmid:
            raise CorpusFormatError("Article has an empty pmid")
        if not 1000 <= self.year <= 9999:
            raise CorpusFormatError(f"Article {self.pmid}: year {self.year} is not 4-digit")

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Article":
        try:
            headings = tuple(
                Heading(ui=str(h["ui"]), major=bool(h.get("major", False)))
                for h in data.get("headings") or ()
            )
            return cls(
                pmid=str(data["pmid"]),
                year=int(data["year"]),
                pub_types=frozenset(data.get("pub_types") or ()),
                headings=headings,
            )
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise CorpusFormatError(f"Malformed article {data.get('pmid')!r}: {e!r}")

    @property
    def major_uis(self) -> frozenset[str]:
        return frozenset(h.ui for h in self.headings if h.major)

    @property
    def all_uis(self) -> frozenset[str]:
        return frozenset(h.ui for h in self.headings)

    @property
    def is_clinical_trial(self) -> bool:
        return CLINICAL_TRIAL in self.pub_types


@dataclass(frozen=True)
class PopularitySeries:
    """Per-year major-topic article counts of one term."""

    ui: str
    start_year: int
    end_year: int
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if self.end_year < self.start_year:
            raise ValueError(
                f"Series {self.ui}: end year {self.end_year} precedes start {self.start_year}",
            )
        if len(self.counts) != self.end_year - self.start_year + 1:
            raise ValueError(
                f"Series {self.ui}: {len(self.counts)} counts for "
                f"{self.start_year}-{self.end_year}",
            )
        if any(c < 0 for c in self.counts):
            raise ValueError(f"Series {self.ui}: negative count")

    @property
    def years(self) -> range:
        return range(self.start_year, self.end_year + 1)

    def items(self) -> list[tuple[int, int]]:
        return list(zip(self.years, self.counts))


class CorpusProvider(ABC):
    """Answers count and first-occurrence queries under major-topic, no-explosion semantics."""

    backend: ClassVar[str] = "base"

    @abstractmethod
    def yearly_major_counts(self, ui: str, start_year: int, end_year: int) -> PopularitySeries:
        """Count articles per year carrying ``ui`` as a major heading."""

    @abstractmethod
    def first_indexed_year(self, ui: str) -> int | None:
        """Return the earliest year of an article carrying ``ui`` as a major heading."""

    @abstractmethod
    def first_clinical_trial_year(self, ui: str) -> int | None:
        """Return the earliest year of a clinical-trial article indexed with ``ui``."""

    def close(self) -> None:
        """Release backend resources."""

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
