"""Core EmergencePipeline implementation."""

import logging
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import httpx

from .analysis.profile import TopicProfile, build_profiles
from .analysis.trend import (
    PopularitySummary,
    QuartileLabel,
    TrendClass,
    classify_trend,
    cohort_quartiles,
    summarize,
)
from .config import RunConfig
from .corpus.base import CorpusProvider, PopularitySeries
from .corpus.cache import CountCache
from .corpus.fixture import load_fixture_corpus
from .corpus.live import EutilsClient, LiveCorpus
from .exceptions import ConfigError
from .thesaurus.records import TermRecord, VocabularyDB, read_vocabulary
from .thesaurus.selection import SelectionResult, select_terms

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TermTrend:
    """Popularity, trend class and cohort quartile of one selected term."""

    ui: str
    label: str
    year_added: int
    series: PopularitySeries
    summary: PopularitySummary
    trend_class: TrendClass
    quartile: QuartileLabel


class EmergencePipeline:
    """Runs the stages from vocabulary loading to modeling inputs.

    Stages are computed lazily and memoized, so commands that need only the
    selection never touch popularity counts.
    """

    def __init__(
        self,
        config: RunConfig,
        corpus: CorpusProvider | None = None,
        http_client: httpx.Client | None = None,
    ):
        """Initialize the pipeline.

        Args:
            config: Run configuration
            corpus: Provider to use instead of the configured backend
            http_client: HTTP client for the live backend (tests pass a mocked one)
        """
        self.config = config
        self._corpus = corpus
        self._http_client = http_client
        self._vocabulary: VocabularyDB | None = None
        self._selection: dict[int, SelectionResult] | None = None
        self._series: dict[str, PopularitySeries] | None = None
        self._trends: dict[str, TermTrend] | None = None
        self._profiles: dict[str, TopicProfile] | None = None

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    def close(self) -> None:
        if self._corpus is not None:
            self._corpus.close()

    @property
    def vocabulary(self) -> VocabularyDB:
        if self._vocabulary is None:
            self.config.require_inputs()
            db = read_vocabulary(
                self.config.vocabulary_path,
                self.config.new_terms_path,
                strict=self.config.strict_vocabulary,
            )
            if db.years and max(db.years) > self.config.horizon_year:
                raise ConfigError(
                    f"horizon_year {self.config.horizon_year} is before the latest "
                    f"cohort year {max(db.years)}",
                )
            self._vocabulary = db
        return self._vocabulary

    @property
    def corpus(self) -> CorpusProvider:
        if self._corpus is None:
            self._corpus = self._open_corpus()
        return self._corpus

    def _open_corpus(self) -> CorpusProvider:
        self.config.require_inputs()
        if self.config.backend == "fixture":
            return load_fixture_corpus(self.config.corpus_path)

        live = replace(self.config.live, latest_year=self.config.horizon_year)
        client = EutilsClient(live, client=self._http_client)
        labels = {term.ui: term.label for term in self.vocabulary}
        cache = CountCache(self.config.cache_path) if self.config.cache_path else None
        logger.info(f"Using live backend {live.base_url} at {live.effective_rate:g} req/s")
        return LiveCorpus(client, labels, cache)

    def _map(self, func, items: list) -> list:
        workers = self.config.max_workers
        if workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                return list(executor.map(func, items))
        return [func(item) for item in items]

    def select_all(self) -> dict[int, SelectionResult]:
        """Selection result per cohort year, in year order."""
        if self._selection is None:
            db = self.vocabulary
            self._selection = {
                year: select_terms(db, self.corpus, year, self.config.max_workers)
                for year in db.years
            }
        return self._selection

    def selected_terms(self) -> list[TermRecord]:
        """Selected terms ordered by cohort year, then candidate order."""
        db = self.vocabulary
        terms = []
        for result in self.select_all().values():
            terms.extend(db.terms[ui] for ui in result.selected)
        return terms

    def cohort_of(self) -> dict[str, int]:
        return {ui: year for year, result in self.select_all().items() for ui in result.selected}

    def popularity(self) -> dict[str, PopularitySeries]:
        """Major-topic counts of every selected term from its year added to the horizon."""
        if self._series is None:
            horizon = self.config.horizon_year
            terms = self.selected_terms()
            series = self._map(
                lambda term: self.corpus.yearly_major_counts(term.ui, term.year_added, horizon),
                terms,
            )
            self._series = {s.ui: s for s in series}
            logger.info(f"Materialised popularity series for {len(series)} terms")
        return self._series

    def trends(self) -> dict[str, TermTrend]:
        """Trend class and within-cohort quartile of every selected term."""
        if self._trends is None:
            series = self.popularity()
            summaries = {ui: summarize(s) for ui, s in series.items()}

            cohorts: dict[int, list[tuple[str, int]]] = defaultdict(list)
            for ui, year in self.cohort_of().items():
                cohorts[year].append((ui, summaries[ui].total))
            quartiles: dict[str, QuartileLabel] = {}
            for members in cohorts.values():
                quartiles.update(cohort_quartiles(members))

            self._trends = {}
            for term in self.selected_terms():
                self._trends[term.ui] = TermTrend(
                    ui=term.ui,
                    label=term.label,
                    year_added=term.year_added,
                    series=series[term.ui],
                    summary=summaries[term.ui],
                    trend_class=classify_trend(series[term.ui], self.config.trend),
                    quartile=quartiles[term.ui],
                )
            logger.info(f"Classified trends of {len(self._trends)} terms in {len(cohorts)} cohorts")
        return self._trends

    def profiles(self) -> dict[str, TopicProfile]:
        if self._profiles is None:
            self._profiles = build_profiles(
                self.selected_terms(),
                self.vocabulary,
                self.corpus,
                self.config.horizon_year,
                self.config.keywords,
                self.config.max_workers,
            )
        return self._profiles

    def labels(self) -> dict[str, bool]:
        """Emerging label per term: membership of its cohort's top quartile."""
        return {ui: trend.quartile.emerging for ui, trend in self.trends().items()}
