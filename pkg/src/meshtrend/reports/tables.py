"""Table builders for the command outputs.

Every builder returns a pandas DataFrame (or a dict of them) with a fixed
column order and deterministic row order, ready for ArtifactWriter.
"""

import logging
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import pandas as pd

from ..analysis.profile import (
    LAG_BRACKETS,
    MAX_LAG,
    MIN_LAG,
    PathogenClass,
    TopicProfile,
    lag_stage,
)
from ..analysis.stats import (
    ContingencyTable,
    TestResult,
    chi_square_independence,
    describe,
    group_summaries,
    kruskal_wallis,
    pearson_residuals,
)
from ..analysis.trend import Quartile, TrendClass, emerged_shares, trend_distribution
from ..core import TermTrend
from ..exceptions import StatisticsError
from ..modeling.logistic import LogisticModel
from ..thesaurus.records import CATEGORY_NAMES, VocabularyDB
from ..thesaurus.selection import SelectionResult

logger = logging.getLogger(__name__)

SELECTION_SUMMARY_COLUMNS = ["Year", "# of New MeSH", "# of selected"]
TREND_COLUMNS = [
    "ui",
    "label",
    "year_added",
    "total",
    "per_year",
    "trend_class",
    "quartile",
    "emerging",
]
PROFILE_COLUMNS = [
    "ui",
    "categories",
    "has_narrower",
    "clinical_first_year",
    "clinical_significance",
    "pathogen",
    "lag",
    "lag_stage",
]
DESCRIPTION_COLUMNS = ["Mean", "Min.", "1st Quartile", "Median", "3rd Quartile", "Max."]
QUARTILE_ORDER = [q.value for q in Quartile]
TREND_ORDER = [t.value for t in TrendClass]


# Selection


def selection_summary(results: Mapping[int, SelectionResult]) -> pd.DataFrame:
    """Candidates and selected terms per cohort year."""
    rows = [
        {
            "Year": year,
            "# of New MeSH": result.candidate_count,
            "# of selected": len(result.selected),
        }
        for year, result in sorted(results.items())
    ]
    return pd.DataFrame(rows, columns=SELECTION_SUMMARY_COLUMNS)


def selection_frame(result: SelectionResult, db: VocabularyDB) -> pd.DataFrame:
    return pd.DataFrame(result.rows(db), columns=["ui", "label", "disposition", "reason"])


def exclusion_counts(results: Mapping[int, SelectionResult]) -> pd.DataFrame:
    """Excluded candidates per year and rule."""
    rows = []
    for year, result in sorted(results.items()):
        row: dict[str, Any] = {"Year": year}
        row.update({reason.value: n for reason, n in result.reason_counts().items()})
        rows.append(row)
    return pd.DataFrame(rows)


# Popularity and trends


def counts_frame(trends: Mapping[str, TermTrend]) -> pd.DataFrame:
    """Long-format popularity series: one row per (ui, year)."""
    rows = [
        {"ui": trend.ui, "year": year, "count": count}
        for trend in trends.values()
        for year, count in trend.series.items()
    ]
    return pd.DataFrame(rows, columns=["ui", "year", "count"])


def trend_frame(trends: Mapping[str, TermTrend]) -> pd.DataFrame:
    rows = [
        {
            "ui": t.ui,
            "label": t.label,
            "year_added": t.year_added,
            "total": t.summary.total,
            "per_year": t.summary.per_year,
            "trend_class": t.trend_class.value,
            "quartile": t.quartile.quartile.value,
            "emerging": t.quartile.emerging,
        }
        for t in trends.values()
    ]
    return pd.DataFrame(rows, columns=TREND_COLUMNS)


def popularity_description(trends: Mapping[str, TermTrend]) -> pd.DataFrame:
    """Mean and five-number summary of total and per-year popularity."""
    totals = [t.summary.total for t in trends.values()]
    per_year = [t.summary.per_year for t in trends.values()]
    rows = []
    measures = (
        ("# of articles indexed", totals),
        ("# of articles indexed per year", per_year),
    )
    for name, values in measures:
        s = describe(values)
        rows.append([name, s.mean, s.min, s.q1, s.median, s.q3, s.max])
    return pd.DataFrame(rows, columns=["measure", *DESCRIPTION_COLUMNS])


def top_terms(
    trends: Mapping[str, TermTrend],
    n: int = 10,
    most: bool = True,
    category: str | None = None,
    profiles: Mapping[str, TopicProfile] | None = None,
) -> pd.DataFrame:
    """The n most (or least) popular terms; ties break by ui.

    With ``category`` only terms whose profile lists that category are ranked.
    """
    candidates = list(trends.values())
    if category is not None:
        if profiles is None:
            raise ValueError("Filtering by category needs the term profiles")
        candidates = [t for t in candidates if category in profiles[t.ui].categories]
    sign = -1 if most else 1
    ranked = sorted(candidates, key=lambda t: (sign * t.summary.total, t.ui))[:n]
    rows = [
        {
            "rank": rank,
            "ui": t.ui,
            "label": t.label,
            "year_added": t.year_added,
            "total": t.summary.total,
            "per_year": t.summary.per_year,
        }
        for rank, t in enumerate(ranked, start=1)
    ]
    return pd.DataFrame(rows, columns=["rank", "ui", "label", "year_added", "total", "per_year"])


def trend_distribution_frame(trends: Mapping[str, TermTrend]) -> pd.DataFrame:
    """Terms per trend pattern with overall percentages and shares among emerged terms."""
    distribution = trend_distribution(t.trend_class for t in trends.values())
    shares = emerged_shares(distribution)
    total = sum(distribution.values())
    rows = [
        {
            "trend_class": trend.value,
            "trend": trend.display_name,
            "count": count,
            "percentage": 100.0 * count / total if total else None,
            "share_of_emerged": (
                100.0 * shares[trend] if trend.emerged and shares[trend] is not None else None
            ),
        }
        for trend, count in distribution.items()
    ]
    return pd.DataFrame(rows)


# Topic characteristics


def _join(values: Iterable[str]) -> str:
    return ";".join(sorted(values))


def profile_frame(profiles: Mapping[str, TopicProfile]) -> pd.DataFrame:
    rows = []
    for p in profiles.values():
        lag = p.lag
        rows.append(
            {
                "ui": p.ui,
                "categories": _join(p.categories),
                "has_narrower": p.has_narrower,
                "clinical_first_year": p.clinical_first_year,
                "clinical_significance": p.clinical_significance,
                "pathogen": p.pathogen.value if p.pathogen else None,
                "lag": lag,
                "lag_stage": lag_stage(lag).stage if lag is not None else None,
            }
        )
    frame = pd.DataFrame(rows, columns=PROFILE_COLUMNS)
    for column in ("clinical_first_year", "lag", "lag_stage"):
        frame[column] = frame[column].astype("Int64")
    return frame


def category_shares(profiles: Mapping[str, TopicProfile]) -> pd.DataFrame:
    """Occurrences of each category and their share of all occurrences."""
    counts = Counter(c for p in profiles.values() for c in p.categories)
    total = sum(counts.values())
    rows = [
        {
            "category": c,
            "name": CATEGORY_NAMES.get(c, c),
            "count": n,
            "percentage": 100.0 * n / total,
        }
        for c, n in sorted(counts.items())
    ]
    return pd.DataFrame(rows, columns=["category", "name", "count", "percentage"])


def category_table(
    profiles: Mapping[str, TopicProfile],
    column_of: Mapping[str, str],
    col_labels: Sequence[str],
) -> ContingencyTable:
    """Cross category occurrences with a per-term column label."""
    pairs = [
        (category, column_of[ui])
        for ui, p in profiles.items()
        if ui in column_of
        for category in sorted(p.categories)
    ]
    rows = sorted({c for p in profiles.values() for c in p.categories})
    return ContingencyTable.from_pairs(pairs, rows, col_labels)


def contingency_report(
    table: ContingencyTable,
    categories: Sequence[str],
    name: str,
) -> tuple[dict[str, pd.DataFrame], dict[str, Any]]:
    """Full table with totals, and the chi-square test on a category subset.

    Rows or columns of the subset with a zero total are dropped with a warning
    before testing. Returns the frames to write and the test summary (or the
    reason no test was possible).
    """
    frames = {f"{name}_table": table.to_frame(totals=True)}
    subset = table.subset(rows=list(categories))
    tested = subset.drop_empty()
    dropped_rows = sorted(set(subset.row_labels) - set(tested.row_labels))
    dropped_cols = sorted(set(subset.col_labels) - set(tested.col_labels))
    if dropped_rows or dropped_cols:
        logger.warning(
            f"{name}: dropped empty rows {dropped_rows} and columns {dropped_cols} before testing"
        )

    summary: dict[str, Any] = {
        "rows": list(tested.row_labels),
        "columns": list(tested.col_labels),
        "dropped_rows": dropped_rows,
        "dropped_columns": dropped_cols,
    }
    try:
        result = chi_square_independence(tested)
    except StatisticsError as e:
        logger.warning(f"{name}: chi-square test skipped: {e}")
        summary["test"] = None
        summary["skipped"] = str(e)
        return frames, summary

    summary["test"] = result.to_dict()
    frames[f"{name}_residuals"] = pd.DataFrame(
        pearson_residuals(tested),
        index=list(tested.row_labels),
        columns=list(tested.col_labels),
    )
    return frames, summary


def _test_or_none(groups: Mapping[str, Sequence[float]], name: str) -> TestResult | None:
    nonempty = [list(v) for v in groups.values() if len(v)]
    try:
        return kruskal_wallis(nonempty)
    except StatisticsError as e:
        logger.warning(f"{name}: Kruskal-Wallis skipped: {e}")
        return None


def group_comparison(
    groups: Mapping[str, Sequence[float]],
    name: str,
) -> tuple[pd.DataFrame, dict[str, Any]]:
    """Boxplot summary per group plus a Kruskal-Wallis test across nonempty groups."""
    frame = group_summaries(groups)
    result = _test_or_none(groups, name)
    return frame, {"test": result.to_dict() if result else None}


def clinical_groups(
    trends: Mapping[str, TermTrend],
    profiles: Mapping[str, TopicProfile],
) -> dict[str, list[float]]:
    groups: dict[str, list[float]] = {"Clinical": [], "Non-clinical": []}
    for ui, p in profiles.items():
        key = "Clinical" if p.clinical_significance else "Non-clinical"
        groups[key].append(float(trends[ui].summary.total))
    return groups


def narrower_groups(
    trends: Mapping[str, TermTrend],
    profiles: Mapping[str, TopicProfile],
) -> dict[str, list[float]]:
    groups: dict[str, list[float]] = {"With narrower": [], "Without narrower": []}
    for ui, p in profiles.items():
        key = "With narrower" if p.has_narrower else "Without narrower"
        groups[key].append(float(trends[ui].summary.total))
    return groups


def pathogen_groups(
    trends: Mapping[str, TermTrend],
    profiles: Mapping[str, TopicProfile],
) -> dict[str, list[float]]:
    groups: dict[str, list[float]] = {c.value: [] for c in PathogenClass}
    for ui, p in profiles.items():
        if p.pathogen is not None:
            groups[p.pathogen.value].append(float(trends[ui].summary.total))
    return groups


# Clinical lag


def _bracket_text(low: int, high: int) -> str:
    return f"from {low} to {high}"


def lag_table(profiles: Mapping[str, TopicProfile]) -> pd.DataFrame:
    """Terms per lag stage with percentage and cumulative percentage."""
    stages = Counter(lag_stage(p.lag).stage for p in profiles.values() if p.lag is not None)
    total = sum(stages.values())
    rows = []
    cumulative = 0
    for stage, low, high in LAG_BRACKETS:
        count = stages.get(stage, 0)
        cumulative += count
        rows.append(
            {
                "stage": f"Stage{stage}",
                "time_lag": _bracket_text(low, high),
                "count": count,
                "percentage": 100.0 * count / total if total else None,
                "cumulative_percentage": 100.0 * cumulative / total if total else None,
            }
        )
    return pd.DataFrame(rows)


def lag_histogram(profiles: Mapping[str, TopicProfile]) -> pd.DataFrame:
    """Terms per integer lag over the staged range."""
    lags = Counter(p.lag for p in profiles.values() if p.lag is not None)
    for lag in lags:
        lag_stage(lag)
    rows = [{"lag": lag, "count": lags.get(lag, 0)} for lag in range(MIN_LAG, MAX_LAG + 1)]
    return pd.DataFrame(rows, columns=["lag", "count"])


# Modeling


def coefficient_frame(model: LogisticModel) -> pd.DataFrame:
    return model.coefficient_table()


def csi_curve(sweep: pd.DataFrame) -> pd.DataFrame:
    return sweep[["M", "csi"]].copy()

