"""In-memory corpus backed by a JSONL fixture file."""

import json
import logging
from collections import Counter, defaultdict
from collections.abc import Iterable
from pathlib import Path

from ..exceptions import CorpusFormatError, DuplicateArticleError
from .base import Article, CorpusProvider, PopularitySeries

logger = logging.getLogger(__name__)


class FixtureCorpus(CorpusProvider):
    """Immutable index over a set of articles; safe for concurrent readers."""

    backend = "fixture"

    def __init__(self, articles: Iterable[Article]):
        major_counts: dict[str, Counter[int]] = defaultdict(Counter)
        clinical_first: dict[str, int] = {}
        pmids: set[str] = set()

        for article in articles:
            if article.pmid in pmids:
                raise DuplicateArticleError(f"Duplicate pmid {article.pmid}")
            pmids.add(article.pmid)

            for ui in article.major_uis:
                major_counts[ui][article.year] += 1

            if article.is_clinical_trial:
                for ui in article.all_uis:
                    if ui not in clinical_first or article.year < clinical_first[ui]:
                        clinical_first[ui] = article.year

        self._major_counts = dict(major_counts)
        self._first_major = {ui: min(years) for ui, years in major_counts.items()}
        self._clinical_first = clinical_first
        self._size = len(pmids)

    def __len__(self) -> int:
        return self._size

    def yearly_major_counts(self, ui: str, start_year: int, end_year: int) -> PopularitySeries:
        if start_year > end_year:
            raise ValueError(f"start year {start_year} is after end year {end_year}")
        by_year = self._major_counts.get(ui, Counter())
        counts = tuple(by_year.get(year, 0) for year in range(start_year, end_year + 1))
        return PopularitySeries(ui=ui, start_year=start_year, end_year=end_year, counts=counts)

    def first_indexed_year(self, ui: str) -> int | None:
        return self._first_major.get(ui)

    def first_clinical_trial_year(self, ui: str) -> int | None:
        return self._clinical_first.get(ui)


def iter_articles(lines: Iterable[str]) -> Iterable[Article]:
    """Decode JSONL article lines, skipping blank lines."""
    for line_number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusFormatError(f"Line {line_number}: invalid JSON ({e.msg})")
        if not isinstance(data, dict):
            raise CorpusFormatError(f"Line {line_number}: article is not a JSON object")
        try:
            yield Article.from_dict(data)
        except CorpusFormatError as e:
            raise CorpusFormatError(f"Line {line_number}: {e}")


def load_fixture_corpus(path: str | Path) -> FixtureCorpus:
    """Load a fixture corpus from a JSONL file of articles."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    with open(path, encoding="utf-8") as f:
        corpus = FixtureCorpus(iter_articles(f))

    logger.info(f"Loaded fixture corpus {path} ({len(corpus)} articles)")
    return corpus
