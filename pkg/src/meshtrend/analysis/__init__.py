"""Trend classification, topic profiling and statistics."""

from .profile import (
    LagStage,
    PathogenClass,
    PathogenKeywords,
    TopicProfile,
    build_profile,
    build_profiles,
    classify_pathogen,
    clinical_lag,
    lag_stage,
)
from .stats import (
    ContingencyTable,
    FiveNumberSummary,
    TestResult,
    chi_square_cdf,
    chi_square_independence,
    describe,
    kruskal_wallis,
    pearson_residuals,
    std_normal_cdf,
)
from .trend import (
    PopularitySummary,
    Quartile,
    QuartileLabel,
    TrendClass,
    TrendParams,
    classify_trend,
    cohort_quartiles,
    summarize,
    trend_distribution,
)

__all__ = [
    "ContingencyTable",
    "FiveNumberSummary",
    "LagStage",
    "PathogenClass",
    "PathogenKeywords",
    "PopularitySummary",
    "Quartile",
    "QuartileLabel",
    "TestResult",
    "TopicProfile",
    "TrendClass",
    "TrendParams",
    "build_profile",
    "build_profiles",
    "chi_square_cdf",
    "chi_square_independence",
    "classify_pathogen",
    "classify_trend",
    "clinical_lag",
    "cohort_quartiles",
    "describe",
    "kruskal_wallis",
    "lag_stage",
    "pearson_residuals",
    "std_normal_cdf",
    "summarize",
    "trend_distribution",
]
