"""Popularity summaries, emergence trend patterns and cohort quartiles."""

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum

from ..corpus.base import PopularitySeries
from ..exceptions import EmptyCohortError, EmptySeriesError

DEFAULT_THRESHOLD = 25
DEFAULT_DIP_LEN = 2


class TrendClass(str, Enum):
    """Emergence trend pattern of one term."""

    EMERGED_SUSTAINED = "EmergedSustained"
    EMERGED_NOT_SUSTAINED = "EmergedNotSustained"
    EMERGED_FLUCTUATED = "EmergedFluctuated"
    NOT_YET_EMERGED = "NotYetEmerged"

    @property
    def display_name(self) -> str:
        return _TREND_TITLES[self]

    @property
    def emerged(self) -> bool:
        return self is not TrendClass.NOT_YET_EMERGED


_TREND_TITLES = {
    TrendClass.EMERGED_SUSTAINED: "Emerged and Sustained",
    TrendClass.EMERGED_NOT_SUSTAINED: "Emerged not Sustained",
    TrendClass.EMERGED_FLUCTUATED: "Emerged and Fluctuated",
    TrendClass.NOT_YET_EMERGED: "Not yet Emerged",
}


@dataclass(frozen=True)
class TrendParams:
    """Emergence threshold (articles per year) and the dip length that ends sustainment."""

    threshold: int = DEFAULT_THRESHOLD
    dip_len: int = DEFAULT_DIP_LEN

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError(f"threshold must be >= 1, got {self.threshold}")
        if self.dip_len < 1:
            raise ValueError(f"dip_len must be >= 1, got {self.dip_len}")


class Quartile(str, Enum):
    Q1 = "Q1"
    Q2 = "Q2"
    Q3 = "Q3"
    Q4 = "Q4"


@dataclass(frozen=True)
class QuartileLabel:
    quartile: Quartile

    @property
    def emerging(self) -> bool:
        return self.quartile is Quartile.Q4


@dataclass(frozen=True)
class PopularitySummary:
    total: int
    per_year: float


def summarize(series: PopularitySeries) -> PopularitySummary:
    """Total articles and the average per year of the series span."""
    total = sum(series.counts)
    return PopularitySummary(total=total, per_year=total / len(series.counts))


def _counts_of(series: PopularitySeries | Sequence[int]) -> Sequence[int]:
    return series.counts if isinstance(series, PopularitySeries) else series


def first_emergence_index(
    series: PopularitySeries | Sequence[int],
    params: TrendParams = TrendParams(),
) -> int | None:
    """Index of the first year reaching the threshold, if any."""
    for index, count in enumerate(_counts_of(series)):
        if count >= params.threshold:
            return index
    return None


def classify_trend(
    series: PopularitySeries | Sequence[int],
    params: TrendParams = TrendParams(),
) -> TrendClass:
    """Classify a yearly count series into one of the four trend patterns.

    A term emerges the first year it reaches ``params.threshold``. A later run of at
    least ``params.dip_len`` consecutive years below the threshold ends
    sustainment; reaching the threshold again after such a run makes the pattern
    fluctuating. Shorter dips are ignored, and a dip at the end of the series
    counts.
    """
    counts = _counts_of(series)
    if len(counts) == 0:
        raise EmptySeriesError("Cannot classify an empty series")

    start = first_emergence_index(counts, params)
    if start is None:
        return TrendClass.NOT_YET_EMERGED

    run = 0
    dip_end = None
    for index in range(start + 1, len(counts)):
        if counts[index] < params.threshold:
            run += 1
            if run >= params.dip_len:
                dip_end = index
                break
        else:
            run = 0

    if dip_end is None:
        return TrendClass.EMERGED_SUSTAINED
    if any(count >= params.threshold for count in counts[dip_end + 1 :]):
        return TrendClass.EMERGED_FLUCTUATED
    return TrendClass.EMERGED_NOT_SUSTAINED


def cohort_quartiles(cohort: Sequence[tuple[str, int]]) -> dict[str, QuartileLabel]:
    """Rank a cohort by total popularity and cut it into quartiles.

    Ranks run by descending total with ties broken by ascending ui. The top
    ceil(n/4) ranks form Q4, the next ceil(n/4) Q3, the next Q2, the rest Q1.
    """
    if not cohort:
        raise EmptyCohortError("Cannot assign quartiles to an empty cohort")

    ranked = sorted(cohort, key=lambda item: (-item[1], item[0]))
    size = math.ceil(len(ranked) / 4)
    order = (Quartile.Q4, Quartile.Q3, Quartile.Q2, Quartile.Q1)
    return {
        ui: QuartileLabel(order[min(rank // size, 3)]) for rank, (ui, _) in enumerate(ranked)
    }


def trend_distribution(labels: Iterable[TrendClass]) -> dict[TrendClass, int]:
    """Count terms per trend class, every class present."""
    counts = dict.fromkeys(TrendClass, 0)
    for label in labels:
        counts[TrendClass(label)] += 1
    return counts


def emerged_shares(distribution: dict[TrendClass, int]) -> dict[TrendClass, float | None]:
    """Share of each emerged pattern among all emerged terms."""
    emerged = sum(n for trend, n in distribution.items() if trend.emerged)
    return {
        trend: (distribution[trend] / emerged if emerged else None)
        for trend in TrendClass
        if trend.emerged
    }
