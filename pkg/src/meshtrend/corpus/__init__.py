"""Article counts from a fixture corpus or a live E-utilities backend."""

from .base import (
    CLINICAL_TRIAL,
    DEFAULT_HORIZON_YEAR,
    Article,
    CorpusProvider,
    Heading,
    PopularitySeries,
)
from .cache import CountCache
from .fixture import FixtureCorpus, load_fixture_corpus
from .live import EsearchQuery, EutilsClient, LiveBackendConfig, LiveCorpus, RateLimiter

__all__ = [
    "CLINICAL_TRIAL",
    "DEFAULT_HORIZON_YEAR",
    "Article",
    "CorpusProvider",
    "CountCache",
    "EsearchQuery",
    "EutilsClient",
    "FixtureCorpus",
    "Heading",
    "LiveBackendConfig",
    "LiveCorpus",
    "PopularitySeries",
    "RateLimiter",
    "load_fixture_corpus",
]
