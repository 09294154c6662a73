"""Topic characteristics of selected terms."""

import logging
import re
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import yaml

from ..corpus.base import CorpusProvider
from ..exceptions import (
    ConfigError,
    LagOutOfRangeError,
    MissingClinicalYearError,
    NotAnOrganismError,
    ProfileError,
)
from ..thesaurus.records import (
    TermRecord,
    VocabularyDB,
    broad_categories,
    has_narrower_at_inclusion,
    subject_categories,
)

logger = logging.getLogger(__name__)

PATHOGEN_MARKER = "infection: coord"
ORGANISMS = "B"

DEFAULT_HUMAN_MARKERS = ("human", "humans", "man")
DEFAULT_NONHUMAN_MARKERS = (
    "cattle",
    "swine",
    "pigs",
    "poultry",
    "chickens",
    "fish",
    "plants",
    "birds",
    "mice",
    "rodents",
    "horses",
    "sheep",
    "dogs",
    "cats",
    "simian",
    "monkeys",
    "primates (non-human)",
    "animals",
)

# (stage, lowest lag, highest lag), both ends inclusive
LAG_BRACKETS = ((1, -4, 0), (2, 1, 4), (3, 5, 8), (4, 9, 12), (5, 13, 17))
MIN_LAG = LAG_BRACKETS[0][1]
MAX_LAG = LAG_BRACKETS[-1][2]


class PathogenClass(str, Enum):
    PATHOGEN_HUMAN = "PathogenHuman"
    PATHOGEN_OTHER = "PathogenOther"
    PATHOGEN_BOTH = "PathogenBoth"
    NON_PATHOGEN = "NonPathogen"


@dataclass(frozen=True)
class LagStage:
    stage: int
    lag_years: int

    @property
    def bracket(self) -> tuple[int, int]:
        _, low, high = LAG_BRACKETS[self.stage - 1]
        return low, high


@dataclass(frozen=True)
class PathogenKeywords:
    """Host keyword lists used to resolve which organisms a pathogen affects."""

    human_markers: tuple[str, ...] = DEFAULT_HUMAN_MARKERS
    nonhuman_markers: tuple[str, ...] = DEFAULT_NONHUMAN_MARKERS
    marker: str = PATHOGEN_MARKER
    _patterns: dict[str, re.Pattern] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "human_markers", tuple(self.human_markers))
        object.__setattr__(self, "nonhuman_markers", tuple(self.nonhuman_markers))
        object.__setattr__(
            self,
            "_patterns",
            {
                "human": _keyword_pattern(self.human_markers),
                "nonhuman": _keyword_pattern(self.nonhuman_markers),
            },
        )

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "PathogenKeywords":
        kwargs = {}
        for key in ("human_markers", "nonhuman_markers"):
            if key in data:
                values = data[key]
                if isinstance(values, str) or not isinstance(values, Sequence):
                    raise ConfigError(f"{key} must be a list of strings")
                kwargs[key] = tuple(str(v) for v in values)
        if "marker" in data:
            kwargs["marker"] = str(data["marker"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "PathogenKeywords":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"File not found: {path}")
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
        if not isinstance(data, Mapping):
            raise ConfigError(f"{path}: keyword file must hold a mapping")
        return cls.from_mapping(data)

    def host_hits(self, text: str) -> tuple[bool, bool]:
        """Return (human hit, non-human hit) for a scope note.

        Non-human phrases are blanked out before human markers are searched, so
        "primates (non-human)" does not count as a human host.
        """
        nonhuman = self._patterns["nonhuman"]
        human = self._patterns["human"]
        nonhuman_hit = bool(nonhuman and nonhuman.search(text))
        remainder = nonhuman.sub(" ", text) if nonhuman else text
        human_hit = bool(human and human.search(remainder))
        return human_hit, nonhuman_hit


def _keyword_pattern(keywords: Iterable[str]) -> re.Pattern | None:
    words = sorted({k.strip() for k in keywords if k.strip()}, key=len, reverse=True)
    if not words:
        return None
    alternatives = "|".join(re.escape(w) for w in words)
    return re.compile(rf"(?<!\w)(?:{alternatives})(?!\w)", re.IGNORECASE)


@dataclass(frozen=True)
class TopicProfile:
    """Inclusion-time characteristics of one selected term."""

    ui: str
    year_added: int
    categories: frozenset[str]
    has_narrower: bool
    clinical_first_year: int | None
    pathogen: PathogenClass | None

    def __post_init__(self):
        if (self.pathogen is not None) != (ORGANISMS in self.categories):
            raise ProfileError(
                f"Profile {self.ui}: pathogen class must be set exactly for Organisms terms",
            )

    @property
    def clinical_significance(self) -> bool:
        return self.clinical_first_year is not None

    def clinical_known_by(self, year: int) -> bool:
        """Whether clinical-trial evidence existed by the end of ``year``."""
        return self.clinical_first_year is not None and self.clinical_first_year <= year

    @property
    def lag(self) -> int | None:
        if self.clinical_first_year is None:
            return None
        return clinical_lag(self.year_added, self.clinical_first_year)


def clinical_lag(added_year: int, clinical_first_year: int | None) -> int:
    """Years from inclusion to the first clinical-trial article (negative if earlier)."""
    if clinical_first_year is None:
        raise MissingClinicalYearError("No clinical-trial year to measure a lag from")
    return clinical_first_year - added_year


def lag_stage(lag: int) -> LagStage:
    """Place a lag in its staging bracket."""
    for stage, low, high in LAG_BRACKETS:
        if low <= lag <= high:
            return LagStage(stage=stage, lag_years=lag)
    raise LagOutOfRangeError(f"Lag {lag} is outside [{MIN_LAG}, {MAX_LAG}]")


def classify_pathogen(
    term: TermRecord,
    keywords: PathogenKeywords | None = None,
) -> PathogenClass:
    """Classify an Organisms term by its annotation marker and scope-note hosts."""
    if ORGANISMS not in broad_categories(term):
        raise NotAnOrganismError(f"Term {term.ui} is not in the Organisms category")

    keywords = keywords or PathogenKeywords()
    if keywords.marker.lower() not in term.annotation.lower():
        return PathogenClass.NON_PATHOGEN

    human, nonhuman = keywords.host_hits(term.scope_note)
    if human and nonhuman:
        return PathogenClass.PATHOGEN_BOTH
    if human:
        return PathogenClass.PATHOGEN_HUMAN
    return PathogenClass.PATHOGEN_OTHER


def build_profile(
    term: TermRecord,
    db: VocabularyDB,
    corpus: CorpusProvider,
    horizon_year: int,
    keywords: PathogenKeywords | None = None,
) -> TopicProfile:
    """Assemble the topic characteristics of a selected term."""
    categories = subject_categories(term)
    clinical_year = corpus.first_clinical_trial_year(term.ui)
    if clinical_year is not None and clinical_year > horizon_year:
        clinical_year = None

    pathogen = classify_pathogen(term, keywords) if ORGANISMS in categories else None

    return TopicProfile(
        ui=term.ui,
        year_added=term.year_added,
        categories=categories,
        has_narrower=has_narrower_at_inclusion(db, term),
        clinical_first_year=clinical_year,
        pathogen=pathogen,
    )


def build_profiles(
    terms: Sequence[TermRecord],
    db: VocabularyDB,
    corpus: CorpusProvider,
    horizon_year: int,
    keywords: PathogenKeywords | None = None,
    max_workers: int = 1,
) -> dict[str, TopicProfile]:
    """Profile many terms; result order follows ``terms``."""

    def profile(term: TermRecord) -> TopicProfile:
        return build_profile(term, db, corpus, horizon_year, keywords)

    if max_workers > 1 and len(terms) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            profiles = list(executor.map(profile, terms))
    else:
        profiles = [profile(term) for term in terms]

    logger.info(f"Profiled {len(profiles)} terms")
    return {p.ui: p for p in profiles}
