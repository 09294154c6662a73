"""
Planted fixture generator for meshtrend.
Writes a vocabulary, new-term lists, an article corpus and a run config whose
emergence, trend patterns and clinical lags are known in advance.
"""

import json
import logging
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..analysis.profile import PATHOGEN_MARKER
from ..analysis.trend import DEFAULT_THRESHOLD, TrendClass
from ..corpus.base import CLINICAL_TRIAL, DEFAULT_HORIZON_YEAR
from ..thesaurus.selection import ExclusionReason

logger = logging.getLogger(__name__)

# Share of selected terms per primary category; D terms sometimes also carry E.
CATEGORY_WEIGHTS = {"B": 0.30, "C": 0.15, "D": 0.40, "E": 0.10, "G": 0.05}
HOT_PATTERNS = {
    TrendClass.EMERGED_SUSTAINED: 0.6,
    TrendClass.EMERGED_NOT_SUSTAINED: 0.2,
    TrendClass.EMERGED_FLUCTUATED: 0.2,
}
HOST_NOTES = {
    "human": "Causes epidemic gastroenteritis in humans.",
    "other": "A pathogen of cattle and swine.",
    "both": "Infects humans and poultry.",
}


@dataclass
class PlantedTerm:
    """What the generator decided for one selected term."""

    ui: str
    year_added: int
    categories: tuple[str, ...]
    hot: bool
    clinical: bool
    has_narrower: bool
    trend: TrendClass
    counts: list[int] = field(default_factory=list)


class FixtureSeeder:
    """Planted fixture generator for development and testing.

    Emergence is planted with P(hot | clinical) = 4 * P(hot | not clinical), hot
    terms dominate their cohort's popularity, and every clinical term receives its
    first clinical-trial article ``clinical_lag`` years after inclusion.
    """

    def __init__(
        self,
        cohort_years: Sequence[int] = (2003, 2004, 2005),
        terms_per_year: int = 100,
        seed: int = 7,
        horizon_year: int = DEFAULT_HORIZON_YEAR,
        clinical_rate: float = 0.5,
        hot_given_clinical: float = 0.4,
        hot_given_other: float = 0.1,
        clinical_lag: int = 5,
        narrower_rate: float = 0.25,
        multi_category_rate: float = 0.1,
        threshold: int = DEFAULT_THRESHOLD,
    ):
        """Initialize the generator.

        Args:
            cohort_years: Years with a new-term list
            terms_per_year: Candidates per cohort, including one per exclusion rule
                and one kept at the pre-existing boundary
            seed: Generator seed
            horizon_year: Last year of the corpus
        """
        if not cohort_years:
            raise ValueError("At least one cohort year is required")
        if max(cohort_years) > horizon_year:
            raise ValueError(f"Cohort year {max(cohort_years)} is after horizon {horizon_year}")
        if terms_per_year < 10:
            raise ValueError(f"terms_per_year must be >= 10, got {terms_per_year}")

        self.cohort_years = sorted(cohort_years)
        self.terms_per_year = terms_per_year
        self.seed = seed
        self.horizon_year = horizon_year
        self.clinical_rate = clinical_rate
        self.hot_given_clinical = hot_given_clinical
        self.hot_given_other = hot_given_other
        self.clinical_lag = clinical_lag
        self.narrower_rate = narrower_rate
        self.multi_category_rate = multi_category_rate
        self.threshold = threshold

        self.rng = np.random.default_rng(seed)
        self._next_ui = 100000
        self._next_tree = defaultdict(int)
        self.records: list[dict[str, Any]] = []
        self.new_terms: dict[str, list[str]] = {}
        self.planted: dict[str, PlantedTerm] = {}
        self.exclusions: dict[str, str] = {}
        self._major: dict[int, list[tuple[str, int]]] = defaultdict(list)
        self._clinical: dict[int, list[str]] = defaultdict(list)

    def _ui(self) -> str:
        self._next_ui += 1
        return f"D{self._next_ui:06d}"

    def _tree_number(self, letter: str) -> str:
        self._next_tree[letter] += 1
        n = self._next_tree[letter]
        return f"{letter}{n // 1000 + 1:02d}.{n % 1000:03d}"

    def _record(self, ui: str, year: int, tree_numbers: list[str], **extra: Any) -> dict[str, Any]:
        record = {
            "ui": ui,
            "label": f"Planted Term {ui}",
            "year_added": year,
            "tree_numbers": tree_numbers,
            "annotation": "",
            "scope_note": "",
            "previously_indexing": [],
            "deleted": False,
        }
        record.update(extra)
        self.records.append(record)
        return record

    # Vocabulary

    def seed_exclusion_candidates(self, year: int) -> list[str]:
        """One candidate per exclusion rule, plus one kept at the window boundary."""
        uis = []

        ui = self._ui()
        self._record(ui, year, [self._tree_number("D")], deleted=True, deleted_year=year + 1)
        self.exclusions[ui] = ExclusionReason.DELETED.value
        uis.append(ui)

        ui = self._ui()
        self._record(
            ui,
            year,
            [self._tree_number("C")],
            previously_indexing=[f"Older Heading ({year - 10}-{year - 1})"],
        )
        self.exclusions[ui] = ExclusionReason.PREVIOUSLY_INDEXED.value
        uis.append(ui)

        ui = self._ui()
        self._record(ui, year, [self._tree_number("Z")])
        self.exclusions[ui] = ExclusionReason.NON_SUBJECT_CATEGORY.value
        uis.append(ui)

        ui = self._ui()
        self._record(ui, year, [self._tree_number("D")])
        self._major[year - 6].append((ui, 1))
        self.exclusions[ui] = ExclusionReason.PREEXISTING_CONCEPT.value
        uis.append(ui)

        # First indexed exactly at the window edge: kept, and never indexed afterwards.
        ui = self._ui()
        self._record(ui, year, [self._tree_number("D")])
        self._major[year - 5].append((ui, 1))
        self.planted[ui] = PlantedTerm(
            ui=ui,
            year_added=year,
            categories=("D",),
            hot=False,
            clinical=False,
            has_narrower=False,
            trend=TrendClass.NOT_YET_EMERGED,
            counts=[0] * (self.horizon_year - year + 1),
        )
        uis.append(ui)
        return uis

    def _categories(self) -> tuple[str, ...]:
        letters = list(CATEGORY_WEIGHTS)
        weights = np.array(list(CATEGORY_WEIGHTS.values()))
        primary = str(self.rng.choice(letters, p=weights / weights.sum()))
        if primary == "D" and self.rng.random() < self.multi_category_rate:
            return ("D", "E")
        return (primary,)

    def _pathogen_fields(self) -> dict[str, str]:
        kind = self.rng.choice(["none", "human", "other", "both"], p=[0.4, 0.3, 0.2, 0.1])
        if kind == "none":
            return {"annotation": "", "scope_note": "A free-living organism."}
        return {
            "annotation": f"{PATHOGEN_MARKER} IM with PLANTED INFECTIONS",
            "scope_note": HOST_NOTES[str(kind)],
        }

    def seed_selected_terms(self, year: int, count: int) -> list[str]:
        """Terms that pass every selection rule, with planted characteristics."""
        uis = []
        for _ in range(count):
            ui = self._ui()
            categories = self._categories()
            tree_numbers = [self._tree_number(c) for c in categories]
            extra: dict[str, Any] = {}
            if "B" in categories:
                extra.update(self._pathogen_fields())
            self._record(ui, year, tree_numbers, **extra)

            has_narrower = bool(self.rng.random() < self.narrower_rate)
            if has_narrower:
                # An older concept filed beneath the new broader term.
                self._record(self._ui(), year - 3, [f"{tree_numbers[0]}.001"])

            clinical = bool(self.rng.random() < self.clinical_rate)
            hot_rate = self.hot_given_clinical if clinical else self.hot_given_other
            hot = bool(self.rng.random() < hot_rate)
            trend, counts = self._plant_series(year, hot)

            self.planted[ui] = PlantedTerm(
                ui=ui,
                year_added=year,
                categories=categories,
                hot=hot,
                clinical=clinical,
                has_narrower=has_narrower,
                trend=trend,
                counts=counts,
            )
            for offset, n in enumerate(counts):
                if n:
                    self._major[year + offset].append((ui, n))
            if clinical and year + self.clinical_lag <= self.horizon_year:
                self._clinical[year + self.clinical_lag].append(ui)
            uis.append(ui)
        return uis

    def _plant_series(self, year: int, hot: bool) -> tuple[TrendClass, list[int]]:
        length = self.horizon_year - year + 1
        t = self.threshold
        if not hot or length < 8:
            zero = self.rng.random() < 0.1
            counts = [0] * length if zero else self.rng.integers(0, 7, size=length).tolist()
            return TrendClass.NOT_YET_EMERGED, counts

        patterns = list(HOT_PATTERNS)
        weights = np.array(list(HOT_PATTERNS.values()))
        trend = patterns[int(self.rng.choice(len(patterns), p=weights / weights.sum()))]

        def low() -> int:
            return int(self.rng.integers(0, t // 2))

        def high() -> int:
            return int(self.rng.integers(t + 5, 2 * t + 10))

        start = int(self.rng.integers(0, 3))
        counts = [low() for _ in range(start)]

        if trend is TrendClass.EMERGED_SUSTAINED:
            counts += [high() for _ in range(length - start)]
            # A single-year dip does not end sustainment.
            if length - start > 4 and self.rng.random() < 0.3:
                counts[start + 2] = low()
        elif trend is TrendClass.EMERGED_NOT_SUSTAINED:
            on = min(int(self.rng.integers(5, 9)), length - start - 2)
            counts += [high() for _ in range(on)]
            counts += [low() for _ in range(length - start - on)]
        else:
            on = min(4, length - start - 5)
            counts += [high() for _ in range(on)]
            counts += [low() for _ in range(3)]
            counts += [high() for _ in range(length - len(counts))]
        return trend, counts[:length]

    def seed_vocabulary(self) -> None:
        for year in self.cohort_years:
            uis = self.seed_exclusion_candidates(year)
            uis += self.seed_selected_terms(year, self.terms_per_year - len(uis))
            self.new_terms[str(year)] = uis
        logger.info(
            f"Seeded {len(self.records)} term records over {len(self.cohort_years)} cohorts"
        )

    # Corpus

    def build_articles(self) -> list[dict[str, Any]]:
        """Articles reproducing the planted yearly counts.

        In each year the i-th article carries every term whose count exceeds i as a
        major heading, so a term with count n appears in exactly n articles.
        Clinical-trial articles tag their terms without the major flag.
        """
        articles = []
        pmid = 1
        for year in sorted(self._major):
            entries = self._major[year]
            for i in range(max(n for _, n in entries)):
                headings = [{"ui": ui, "major": True} for ui, n in entries if n > i]
                articles.append(
                    {
                        "pmid": str(pmid),
                        "year": year,
                        "pub_types": ["Journal Article"],
                        "headings": headings,
                    }
                )
                pmid += 1

        for year in sorted(self._clinical):
            articles.append(
                {
                    "pmid": str(pmid),
                    "year": year,
                    "pub_types": ["Journal Article", CLINICAL_TRIAL],
                    "headings": [{"ui": ui, "major": False} for ui in self._clinical[year]],
                }
            )
            pmid += 1
        return articles

    # Output

    def config_document(self) -> dict[str, Any]:
        return {
            "vocabulary_path": "vocabulary.jsonl",
            "new_terms_path": "new_terms.json",
            "corpus_path": "corpus.jsonl",
            "backend": "fixture",
            "horizon_year": self.horizon_year,
            "trend": {"threshold": self.threshold, "dip_len": 2},
            "folds": 5,
            "seed": 42,
            "output_dir": "results",
        }

    def manifest(self) -> dict[str, Any]:
        """Planted ground truth, for tests and demonstrations."""
        return {
            "seed": self.seed,
            "clinical_lag": self.clinical_lag,
            "exclusions": self.exclusions,
            "terms": {
                ui: {
                    "year_added": p.year_added,
                    "categories": list(p.categories),
                    "hot": p.hot,
                    "clinical": p.clinical,
                    "has_narrower": p.has_narrower,
                    "trend": p.trend.value,
                }
                for ui, p in self.planted.items()
            },
        }

    def seed_all(self, output_dir: str | Path) -> dict[str, Path]:
        """Generate everything and write it to ``output_dir``.

        Returns:
            Map of artifact name to written path
        """
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        if not self.records:
            self.seed_vocabulary()
        articles = self.build_articles()

        paths = {
            "vocabulary": output_dir / "vocabulary.jsonl",
            "new_terms": output_dir / "new_terms.json",
            "corpus": output_dir / "corpus.jsonl",
            "config": output_dir / "config.json",
            "manifest": output_dir / "planted.json",
        }
        _write_lines(paths["vocabulary"], self.records)
        _write_lines(paths["corpus"], articles)
        _write_json(paths["new_terms"], self.new_terms)
        _write_json(paths["config"], self.config_document())
        _write_json(paths["manifest"], self.manifest())

        logger.info(f"Wrote fixture with {len(articles)} articles to {output_dir}")
        return paths

    def get_stats(self) -> dict[str, int]:
        return {
            "records": len(self.records),
            "candidates": sum(len(uis) for uis in self.new_terms.values()),
            "selected": len(self.planted),
            "hot": sum(p.hot for p in self.planted.values()),
            "clinical": sum(p.clinical for p in self.planted.values()),
        }


def _write_lines(path: Path, items: list[dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for item in items:
            f.write(json.dumps(item, separators=(",", ":")) + "\n")


def _write_json(path: Path, payload: dict[str, Any]) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
