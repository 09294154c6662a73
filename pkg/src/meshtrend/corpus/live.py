"""
Live corpus backend speaking the E-utilities esearch protocol.

Only result counts are requested; first-occurrence years are found by binary
search over cumulative publication-date ranges.
"""

import logging
import math
import threading
import time
from collections import deque
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from typing import Any

import httpx
from tenacity import (
    RetryError,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from ..exceptions import (
    BackendError,
    RateBudgetExceededError,
    UnknownTermError,
    UnparsableResponseError,
)
from .base import DEFAULT_HORIZON_YEAR, CorpusProvider, PopularitySeries
from .cache import CountCache

logger = logging.getLogger(__name__)

ESEARCH_URL = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi"
RETRYABLE_STATUS = frozenset({429, 500, 502, 503, 504})


@dataclass
class LiveBackendConfig:
    """Connection settings for the live backend."""

    base_url: str = ESEARCH_URL
    api_key: str | None = None
    rate_limit: float | None = None
    max_retries: int = 4
    backoff_base: float = 0.5
    backoff_max: float = 8.0
    timeout: float = 30.0
    request_budget: int | None = None
    floor_year: int = 1900
    latest_year: int = DEFAULT_HORIZON_YEAR
    tool: str = "meshtrend"
    email: str | None = None
    extra_params: dict[str, str] = field(default_factory=dict)

    @property
    def effective_rate(self) -> float:
        """Requests per second: explicit limit, else 10 with an API key and 3 without."""
        if self.rate_limit:
            return float(self.rate_limit)
        return 10.0 if self.api_key else 3.0


class RateLimiter:
    """Sliding-window limiter: at most floor(rate * period) admissions in any ``period``.

    Below one admission per period, admissions are spaced ``1 / rate`` seconds apart.
    """

    def __init__(
        self,
        rate: float,
        period: float = 1.0,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate <= 0:
            raise ValueError(f"rate must be positive, got {rate}")
        self.rate = rate
        self.period = period
        allowance = math.floor(rate * period)
        if allowance >= 1:
            self._capacity = allowance
            self._window = period
        else:
            self._capacity = 1
            self._window = 1.0 / rate
        self._clock = clock
        self._sleep = sleep
        self._admitted: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> float:
        """Block until a request may be sent; return the admission time."""
        with self._lock:
            while True:
                now = self._clock()
                if len(self._admitted) < self._capacity:
                    break
                wait = self._admitted[0] + self._window - now
                if wait <= 0:
                    self._admitted.popleft()
                    break
                self._sleep(wait)
            self._admitted.append(now)
            return now


@dataclass(frozen=True)
class EsearchQuery:
    """One count request."""

    term: str
    sort: str | None = None

    def params(self) -> dict[str, str]:
        params = {"db": "pubmed", "retmode": "json", "rettype": "count", "term": self.term}
        if self.sort:
            params["sort"] = self.sort
        return params


class RetryableResponseError(Exception):
    """A transient backend answer worth retrying."""

    def __init__(self, status_code: int):
        super().__init__(f"HTTP {status_code}")
        self.status_code = status_code


def major_topic_term(label: str, start_year: int, end_year: int | None = None) -> str:
    """Query for articles with ``label`` as major topic, descendants excluded."""
    return f'"{label}"[MAJR:noexp] AND {_date_clause(start_year, end_year)}'


def clinical_trial_term(label: str, start_year: int, end_year: int | None = None) -> str:
    """Query for clinical-trial articles indexed with ``label`` under any major flag."""
    return (
        f'"{label}"[MeSH Terms:noexp] AND clinical trial[pt] AND '
        f"{_date_clause(start_year, end_year)}"
    )


def _date_clause(start_year: int, end_year: int | None) -> str:
    if end_year is None or end_year == start_year:
        return f"{start_year}[dp]"
    return f"{start_year}:{end_year}[dp]"


class EutilsClient:
    """Throttled, retrying client for esearch count requests."""

    def __init__(
        self,
        config: LiveBackendConfig | None = None,
        client: httpx.Client | None = None,
        limiter: RateLimiter | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config or LiveBackendConfig()
        self.client = client or httpx.Client(timeout=self.config.timeout)
        self.limiter = limiter or RateLimiter(self.config.effective_rate, sleep=sleep)
        self._sleep = sleep
        self._requests = 0
        self._budget_lock = threading.Lock()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    def close(self) -> None:
        self.client.close()

    @property
    def requests_sent(self) -> int:
        return self._requests

    def live_count(self, query: EsearchQuery) -> int:
        """Return the result count of one esearch request.

        Raises:
            BackendError: Non-success status, or transient failures outlasting retries
            UnparsableResponseError: The body carries no integer count
            RateBudgetExceededError: The configured request budget is spent
        """
        retrying = Retrying(
            stop=stop_after_attempt(self.config.max_retries + 1),
            wait=wait_exponential(
                multiplier=self.config.backoff_base,
                max=self.config.backoff_max,
            ),
            retry=retry_if_exception_type((RetryableResponseError, httpx.TransportError)),
            sleep=self._sleep,
            before_sleep=self._log_retry,
        )
        try:
            response = retrying(self._send, query)
        except RetryError as e:
            last = e.last_attempt.exception()
            raise BackendError(
                f"esearch failed after {self.config.max_retries + 1} attempts: {last}",
            )

        return self._parse_count(response)

    def _send(self, query: EsearchQuery) -> httpx.Response:
        with self._budget_lock:
            budget = self.config.request_budget
            if budget is not None and self._requests >= budget:
                raise RateBudgetExceededError(f"Request budget of {budget} exhausted")
            self._requests += 1

        self.limiter.acquire()

        params: dict[str, Any] = {**self.config.extra_params, **query.params()}
        if self.config.api_key:
            params["api_key"] = self.config.api_key
        if self.config.tool:
            params["tool"] = self.config.tool
        if self.config.email:
            params["email"] = self.config.email

        response = self.client.get(self.config.base_url, params=params)
        if response.status_code in RETRYABLE_STATUS:
            raise RetryableResponseError(response.status_code)
        if response.status_code != 200:
            raise BackendError(f"esearch returned HTTP {response.status_code}")
        return response

    @staticmethod
    def _parse_count(response: httpx.Response) -> int:
        try:
            result = response.json()["esearchresult"]
        except (ValueError, KeyError, TypeError):
            raise UnparsableResponseError(f"No esearchresult in response: {response.text[:200]}")

        if "ERROR" in result:
            raise UnparsableResponseError(f"esearch error: {result['ERROR']}")
        try:
            return int(result["count"])
        except (KeyError, TypeError, ValueError):
            raise UnparsableResponseError(f"No integer count in response: {result!r}")

    @staticmethod
    def _log_retry(retry_state) -> None:
        logger.warning(
            f"esearch attempt {retry_state.attempt_number} failed "
            f"({retry_state.outcome.exception()}); backing off",
        )


class LiveCorpus(CorpusProvider):
    """Corpus provider answering from the live backend by term label."""

    backend = "live"

    def __init__(
        self,
        client: EutilsClient,
        labels: Mapping[str, str],
        cache: CountCache | None = None,
    ):
        self.client = client
        self.labels = dict(labels)
        self.cache = cache
        self.floor_year = client.config.floor_year
        self.latest_year = client.config.latest_year

    def close(self) -> None:
        if self.cache is not None:
            self.cache.save()
        self.client.close()

    def _label(self, ui: str) -> str:
        try:
            return self.labels[ui]
        except KeyError:
            raise UnknownTermError(f"No label known for ui {ui}")

    def _count(self, term: str) -> int:
        return self.client.live_count(EsearchQuery(term=term))

    def _year_count(self, ui: str, year: int) -> int:
        if self.cache is not None:
            cached = self.cache.get(ui, year)
            if cached is not None:
                return cached
        count = self._count(major_topic_term(self._label(ui), year))
        if self.cache is not None:
            self.cache.put(ui, year, count)
        return count

    def yearly_major_counts(self, ui: str, start_year: int, end_year: int) -> PopularitySeries:
        if start_year > end_year:
            raise ValueError(f"start year {start_year} is after end year {end_year}")
        counts = tuple(self._year_count(ui, year) for year in range(start_year, end_year + 1))
        return PopularitySeries(ui=ui, start_year=start_year, end_year=end_year, counts=counts)

    def first_indexed_year(self, ui: str) -> int | None:
        label = self._label(ui)
        return self._first_year(lambda lo, hi: major_topic_term(label, lo, hi))

    def first_clinical_trial_year(self, ui: str) -> int | None:
        label = self._label(ui)
        return self._first_year(lambda lo, hi: clinical_trial_term(label, lo, hi))

    def _first_year(self, term_for: Callable[[int, int], str]) -> int | None:
        """Find the earliest year with a hit using cumulative range counts."""
        lo, hi = self.floor_year, self.latest_year
        if self._count(term_for(lo, hi)) == 0:
            return None

        # Invariant: the range [floor, hi] has at least one hit.
        while lo < hi:
            mid = (lo + hi) // 2
            if self._count(term_for(self.floor_year, mid)) > 0:
                hi = mid
            else:
                lo = mid + 1
        return lo
