"""Descriptive statistics, contingency tests and Kruskal-Wallis."""

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np
import pandas as pd
from scipy import special
from scipy.stats import rankdata

from ..exceptions import StatisticsError


@dataclass(frozen=True)
class FiveNumberSummary:
    mean: float
    min: float
    q1: float
    median: float
    q3: float
    max: float

    def to_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class TestResult:
    """Outcome of a hypothesis test."""

    __test__ = False  # not a pytest class

    test: str
    statistic: float
    df: int
    p_value: float

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))
        if counts.shape != (len(self.row_labels), len(self.col_labels)):
            raise StatisticsError(
                f"Table shape {counts.shape} does not match "
                f"{len(self.row_labels)}x{len(self.col_labels)} labels",
            )
        if (counts < 0).any():
            raise StatisticsError("Contingency counts must be non-negative")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_pairs(
        cls,
        pairs: Iterable[tuple[str, str]],
        row_labels: Sequence[str],
        col_labels: Sequence[str],
    ) -> "ContingencyTable":
        """Tally (row, column) observations; pairs outside the labels are ignored."""
        rows = {label: i for i, label in enumerate(row_labels)}
        cols = {label: j for j, label in enumerate(col_labels)}
        counts = np.zeros((len(row_labels), len(col_labels)), dtype=np.int64)
        for row, col in pairs:
            if row in rows and col in cols:
                counts[rows[row], cols[col]] += 1
        return cls(tuple(row_labels), tuple(col_labels), counts)

    @property
    def grand_total(self) -> int:
        return int(self.counts.sum())

    def subset(
        self,
        rows: Sequence[str] | None = None,
        cols: Sequence[str] | None = None,
    ) -> "ContingencyTable":
        rows = [r for r in (rows or self.row_labels) if r in self.row_labels]
        cols = [c for c in (cols or self.col_labels) if c in self.col_labels]
        ri = [self.row_labels.index(r) for r in rows]
        ci = [self.col_labels.index(c) for c in cols]
        return ContingencyTable(tuple(rows), tuple(cols), self.counts[np.ix_(ri, ci)])

    def drop_empty(self) -> "ContingencyTable":
        """Remove rows and columns whose total is zero."""
        keep_rows = self.counts.sum(axis=1) > 0
        keep_cols = self.counts.sum(axis=0) > 0
        return ContingencyTable(
            tuple(r for r, keep in zip(self.row_labels, keep_rows) if keep),
            tuple(c for c, keep in zip(self.col_labels, keep_cols) if keep),
            self.counts[np.ix_(keep_rows, keep_cols)],
        )

    def to_frame(self, totals: bool = False) -> pd.DataFrame:
        frame = pd.DataFrame(
            self.counts, index=list(self.row_labels), columns=list(self.col_labels)
        )
        if totals:
            frame["Total"] = frame.sum(axis=1)
            frame.loc["Total"] = frame.sum(axis=0)
        return frame


def describe(values: Sequence[float]) -> FiveNumberSummary:
    """Mean and five-number summary; quartiles interpolate linearly between ranks."""
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise StatisticsError("Cannot describe an empty sample")
    q1, median, q3 = np.quantile(data, [0.25, 0.5, 0.75])
    return FiveNumberSummary(
        mean=float(data.mean()),
        min=float(data.min()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        max=float(data.max()),
    )


def chi_square_cdf(x: float, df: int) -> float:
    """Chi-square CDF as the regularized lower incomplete gamma P(df/2, x/2)."""
    _check_chi_square_domain(x, df)
    return float(special.gammainc(df / 2.0, x / 2.0))


def chi_square_sf(x: float, df: int) -> float:
    """Upper tail 1 - CDF, computed directly to keep precision for large x."""
    _check_chi_square_domain(x, df)
    return float(special.gammaincc(df / 2.0, x / 2.0))


def _check_chi_square_domain(x: float, df: int) -> None:
    if not np.isfinite(x) or x < 0:
        raise StatisticsError(f"chi-square argument must be finite and >= 0, got {x}")
    if df < 1:
        raise StatisticsError(f"degrees of freedom must be >= 1, got {df}")


def std_normal_cdf(z: float) -> float:
    if np.isnan(z):
        raise StatisticsError("std_normal_cdf of NaN")
    return float(special.ndtr(z))


def _expected(table: ContingencyTable) -> np.ndarray:
    counts = table.counts
    if counts.shape[0] < 2 or counts.shape[1] < 2:
        raise StatisticsError(f"Need at least a 2x2 table, got {counts.shape}")
    row_totals = counts.sum(axis=1)
    col_totals = counts.sum(axis=0)
    if (row_totals == 0).any() or (col_totals == 0).any():
        raise StatisticsError("Contingency table has a zero row or column total")
    return np.outer(row_totals, col_totals) / counts.sum()


def pearson_residuals(table: ContingencyTable) -> np.ndarray:
    """(observed - expected) / sqrt(expected) for every cell."""
    expected = _expected(table)
    return (table.counts - expected) / np.sqrt(expected)


def chi_square_independence(table: ContingencyTable) -> TestResult:
    """Pearson chi-square test of independence, no continuity correction."""
    residuals = pearson_residuals(table)
    statistic = float((residuals**2).sum())
    df = (table.counts.shape[0] - 1) * (table.counts.shape[1] - 1)
    return TestResult(
        test="chi_square_independence",
        statistic=statistic,
        df=df,
        p_value=chi_square_sf(statistic, df),
    )


def kruskal_wallis(groups: Sequence[Sequence[float]]) -> TestResult:
    """Kruskal-Wallis H with average ranks and tie correction.

    The p-value uses the chi-square approximation with groups - 1 degrees of
    freedom. When every value is tied, H is reported as 0 with p = 1.
    """
    if len(groups) < 2:
        raise StatisticsError(f"Kruskal-Wallis needs at least 2 groups, got {len(groups)}")
    arrays = [np.asarray(g, dtype=float) for g in groups]
    if any(a.size == 0 for a in arrays):
        raise StatisticsError("Kruskal-Wallis groups must be nonempty")

    pooled = np.concatenate(arrays)
    n = pooled.size
    if n < 3:
        raise StatisticsError(f"Kruskal-Wallis needs at least 3 observations, got {n}")

    ranks = rankdata(pooled)
    df = len(arrays) - 1

    _, tie_sizes = np.unique(pooled, return_counts=True)
    correction = 1.0 - float((tie_sizes**3 - tie_sizes).sum()) / (n**3 - n)
    if correction <= 0:
        return TestResult(test="kruskal_wallis", statistic=0.0, df=df, p_value=1.0)

    rank_term = 0.0
    offset = 0
    for a in arrays:
        rank_sum = ranks[offset : offset + a.size].sum()
        rank_term += rank_sum**2 / a.size
        offset += a.size

    h = (12.0 / (n * (n + 1)) * rank_term - 3.0 * (n + 1)) / correction
    h = max(h, 0.0)
    return TestResult(
        test="kruskal_wallis", statistic=float(h), df=df, p_value=chi_square_sf(h, df)
    )


def group_summaries(groups: Mapping[str, Sequence[float]]) -> pd.DataFrame:
    """Median, observation count and five-number summary per group (boxplot data)."""
    rows = []
    for name, values in groups.items():
        row: dict[str, Any] = {"group": name, "n": len(values)}
        if len(values):
            row.update(describe(values).to_dict())
        rows.append(row)
    columns = ["group", "n", "mean", "min", "q1", "median", "q3", "max"]
    return pd.DataFrame(rows).reindex(columns=columns)
