"""Feature encoding of topic profiles for the emergence model."""

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ..analysis.profile import TopicProfile
from ..thesaurus.records import CATEGORY_NAMES

DEFAULT_DUMMY_CATEGORIES = ("B", "C", "D")
INTERCEPT = "(Intercept)"


class ObservationUnit(str, Enum):
    """How multi-category terms become design rows."""

    OCCURRENCE = "occurrence"  # one row per (term, category)
    TERM = "term"  # one multi-hot row per term


@dataclass(frozen=True)
class FeatureVector:
    clinical: int
    narrower: int
    category_dummies: tuple[int, ...]

    def as_row(self) -> tuple[float, ...]:
        """Values in design-column order (intercept excluded)."""
        return (float(self.narrower), *map(float, self.category_dummies), float(self.clinical))


def feature_names(dummy_categories: Sequence[str] = DEFAULT_DUMMY_CATEGORIES) -> tuple[str, ...]:
    """Design column names, intercept first."""
    dummies = tuple(
        f"Category_{CATEGORY_NAMES.get(c, c).replace(' and ', ' & ')} ({c})"
        for c in dummy_categories
    )
    return (INTERCEPT, "NarrowerTerm", *dummies, "ClinicalSignificance")


def encode_features(
    profile: TopicProfile,
    forecast_year: int | None,
    dummy_categories: Sequence[str] = DEFAULT_DUMMY_CATEGORIES,
    categories: frozenset[str] | None = None,
) -> FeatureVector:
    """Encode a profile as known in the M-th year after inclusion.

    Args:
        profile: Term characteristics
        forecast_year: M >= 1; clinical evidence counts only if its year is at most
            year_added + M - 1. None uses everything known at the horizon.
        dummy_categories: Categories with an indicator column; the rest are reference
        categories: Categories to encode instead of the profile's own (one
            occurrence row of a multi-category term)
    """
    if forecast_year is None:
        clinical = profile.clinical_significance
    else:
        if forecast_year < 1:
            raise ValueError(f"forecasting year M must be >= 1, got {forecast_year}")
        clinical = profile.clinical_known_by(profile.year_added + forecast_year - 1)

    present = profile.categories if categories is None else categories
    return FeatureVector(
        clinical=int(clinical),
        narrower=int(profile.has_narrower),
        category_dummies=tuple(int(c in present) for c in dummy_categories),
    )


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix with intercept column, labels and the term behind each row."""

    X: np.ndarray
    y: np.ndarray
    groups: tuple[str, ...]
    feature_names: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.y)

    def term_labels(self) -> dict[str, int]:
        """Label per term (rows of one term share it)."""
        return {g: int(label) for g, label in zip(self.groups, self.y)}

    def rows_for(self, terms: set[str]) -> np.ndarray:
        return np.array([g in terms for g in self.groups], dtype=bool)


def build_dataset(
    profiles: Sequence[TopicProfile],
    labels: Mapping[str, bool],
    forecast_year: int | None = None,
    dummy_categories: Sequence[str] = DEFAULT_DUMMY_CATEGORIES,
    unit: ObservationUnit | str = ObservationUnit.OCCURRENCE,
) -> Dataset:
    """Encode profiles into a design matrix.

    In occurrence mode a term with k categories yields k rows, each encoding a
    single category; in term mode every term yields one multi-hot row.
    """
    unit = ObservationUnit(unit)
    rows: list[tuple[float, ...]] = []
    y: list[int] = []
    groups: list[str] = []

    for profile in sorted(profiles, key=lambda p: p.ui):
        label = int(bool(labels[profile.ui]))
        if unit is ObservationUnit.OCCURRENCE and profile.categories:
            encodings = [
                encode_features(profile, forecast_year, dummy_categories, frozenset({c}))
                for c in sorted(profile.categories)
            ]
        else:
            encodings = [encode_features(profile, forecast_year, dummy_categories)]

        for vector in encodings:
            rows.append((1.0, *vector.as_row()))
            y.append(label)
            groups.append(profile.ui)

    width = len(dummy_categories) + 3
    X = np.array(rows, dtype=float).reshape(len(rows), width)
    return Dataset(
        X=X,
        y=np.array(y, dtype=float),
        groups=tuple(groups),
        feature_names=feature_names(dummy_categories),
    )
