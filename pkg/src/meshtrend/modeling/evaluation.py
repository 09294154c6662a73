"""Down-sampling, stratified cross-validation and the forecasting sweep."""

import logging
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, TypeVar

import numpy as np
import pandas as pd

from ..analysis.profile import TopicProfile
from ..exceptions import DimensionMismatchError, InsufficientDataError, SeparationError
from .features import DEFAULT_DUMMY_CATEGORIES, Dataset, ObservationUnit, build_dataset
from .logistic import LogisticModel, fit_logistic, predict_with

logger = logging.getLogger(__name__)

T = TypeVar("T")

DEFAULT_FOLDS = 5
DEFAULT_SEED = 42
DEFAULT_THRESHOLD = 0.5
FORECAST_YEARS = tuple(range(1, 11))
SWEEP_COLUMNS = ["M", "accuracy", "recall", "precision", "f_measure", "csi"]


def _ratio(numerator: int, denominator: int) -> float | None:
    return numerator / denominator if denominator else None


@dataclass(frozen=True)
class Metrics:
    """Confusion counts and the ratios derived from them; undefined ratios are None."""

    tp: int
    fp: int
    fn: int
    tn: int
    accuracy: float | None
    precision: float | None
    recall: float | None
    f_measure: float | None
    csi: float | None

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int, tn: int) -> "Metrics":
        precision = _ratio(tp, tp + fp)
        recall = _ratio(tp, tp + fn)
        if precision is None or recall is None or precision + recall == 0:
            f_measure = None
        else:
            f_measure = 2 * precision * recall / (precision + recall)
        return cls(
            tp=tp,
            fp=fp,
            fn=fn,
            tn=tn,
            accuracy=_ratio(tp + tn, tp + fp + fn + tn),
            precision=precision,
            recall=recall,
            f_measure=f_measure,
            csi=_ratio(tp, tp + fp + fn),
        )

    def __add__(self, other: "Metrics") -> "Metrics":
        return Metrics.from_counts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.tn + other.tn,
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def evaluate(
    preds: Sequence[float] | np.ndarray,
    labels: Sequence[int] | np.ndarray,
    threshold: float = DEFAULT_THRESHOLD,
) -> Metrics:
    """Score probabilities against 0/1 labels; pi >= threshold counts as positive."""
    predicted = np.asarray(preds, dtype=float) >= threshold
    actual = np.asarray(labels).astype(bool)
    if predicted.shape != actual.shape:
        raise DimensionMismatchError(
            f"{predicted.size} predictions for {actual.size} labels",
        )
    return Metrics.from_counts(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
        tn=int(np.sum(~predicted & ~actual)),
    )


def downsample(
    examples: Sequence[T],
    label_fn: Callable[[T], bool],
    seed: int | np.random.Generator | np.random.SeedSequence,
) -> list[T]:
    """Balance classes by sampling negatives without replacement.

    All positives are kept together with as many negatives as there are positives,
    or every negative when there are fewer. The result keeps the input order.
    """
    rng = np.random.default_rng(seed)
    positives = [i for i, example in enumerate(examples) if label_fn(example)]
    negatives = [i for i, example in enumerate(examples) if not label_fn(example)]
    if not positives:
        raise InsufficientDataError("Cannot down-sample without positive examples")

    if len(negatives) < len(positives):
        logger.warning(
            f"Only {len(negatives)} negatives for {len(positives)} positives; keeping all"
        )
        chosen = negatives
    else:
        chosen = rng.choice(negatives, size=len(positives), replace=False).tolist()

    keep = sorted(positives + chosen)
    return [examples[i] for i in keep]


def stratified_folds(
    term_labels: Mapping[str, int],
    k: int,
    seed: int | np.random.Generator | np.random.SeedSequence,
) -> dict[str, int]:
    """Assign each term to one of k folds, spreading each class evenly."""
    rng = np.random.default_rng(seed)
    folds: dict[str, int] = {}
    for label in (1, 0):
        terms = sorted(ui for ui, value in term_labels.items() if value == label)
        for position, index in enumerate(rng.permutation(len(terms))):
            folds[terms[index]] = position % k
    return folds


@dataclass(frozen=True)
class FoldRecord:
    """Terms used to train and test one fold, and the fold's own confusion counts."""

    fold: int
    train_terms: frozenset[str]
    test_terms: frozenset[str]
    metrics: Metrics
    dropped_columns: tuple[str, ...] = ()
    separated: bool = False


@dataclass(frozen=True)
class CrossValidationResult:
    metrics: Metrics
    folds: tuple[FoldRecord, ...]


def _usable_columns(X: np.ndarray) -> list[int]:
    """Columns to fit on: the intercept plus non-constant, linearly independent columns."""
    keep = [0]
    for j in range(1, X.shape[1]):
        column = X[:, j]
        if np.all(column == column[0]):
            continue
        if np.linalg.matrix_rank(X[:, keep + [j]]) == len(keep) + 1:
            keep.append(j)
    return keep


def _fit_fold(
    dataset: Dataset,
    fold: int,
    fold_of: Mapping[str, int],
    seed: np.random.SeedSequence,
    threshold: float,
) -> FoldRecord:
    term_labels = dataset.term_labels()
    train_pool = sorted(ui for ui, f in fold_of.items() if f != fold)
    test_terms = frozenset(ui for ui, f in fold_of.items() if f == fold)
    train_terms = frozenset(downsample(train_pool, lambda ui: term_labels[ui] == 1, seed))

    train_rows = dataset.rows_for(set(train_terms))
    test_rows = dataset.rows_for(set(test_terms))
    X_train, y_train = dataset.X[train_rows], dataset.y[train_rows]

    columns = _usable_columns(X_train)
    dropped = tuple(name for j, name in enumerate(dataset.feature_names) if j not in columns)
    if dropped:
        logger.warning(f"Fold {fold}: dropped columns without variation: {', '.join(dropped)}")

    separated = False
    try:
        model = fit_logistic(
            X_train[:, columns],
            y_train,
            [dataset.feature_names[j] for j in columns],
        )
        fitted = model.coefficients
    except SeparationError as e:
        logger.warning(f"Fold {fold}: {e}; predicting with the last iterate")
        fitted = e.coefficients
        separated = True

    coefficients = np.zeros(dataset.X.shape[1])
    coefficients[columns] = fitted
    preds = predict_with(coefficients, dataset.X[test_rows])
    return FoldRecord(
        fold=fold,
        train_terms=train_terms,
        test_terms=test_terms,
        metrics=evaluate(preds, dataset.y[test_rows], threshold),
        dropped_columns=dropped,
        separated=separated,
    )


def cross_validate(
    dataset: Dataset,
    k: int = DEFAULT_FOLDS,
    seed: int = DEFAULT_SEED,
    threshold: float = DEFAULT_THRESHOLD,
    max_workers: int = 1,
) -> CrossValidationResult:
    """Stratified k-fold cross-validation with per-fold training down-sampling.

    Folds hold whole terms, so every occurrence row of a term is either trained on
    or tested on. Test folds are never down-sampled. Confusion counts of all test
    folds are pooled before the metrics are computed.

    Raises:
        InsufficientDataError: fewer than k positive or k negative terms
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    term_labels = dataset.term_labels()
    positives = sum(term_labels.values())
    negatives = len(term_labels) - positives
    if positives < k or negatives < k:
        raise InsufficientDataError(
            f"Need at least {k} terms per class, got {positives} positive / {negatives} negative"
        )

    assignment_seed, *fold_seeds = np.random.SeedSequence(seed).spawn(k + 1)
    fold_of = stratified_folds(term_labels, k, assignment_seed)

    def run(fold: int) -> FoldRecord:
        return _fit_fold(dataset, fold, fold_of, fold_seeds[fold], threshold)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            records = tuple(executor.map(run, range(k)))
    else:
        records = tuple(run(fold) for fold in range(k))

    pooled = Metrics.from_counts(0, 0, 0, 0)
    for record in records:
        pooled = pooled + record.metrics
    return CrossValidationResult(metrics=pooled, folds=records)


def sweep_forecast(
    profiles: Iterable[TopicProfile],
    labels: Mapping[str, bool],
    forecast_years: Iterable[int] = FORECAST_YEARS,
    k: int = DEFAULT_FOLDS,
    seed: int = DEFAULT_SEED,
    dummy_categories: Sequence[str] = DEFAULT_DUMMY_CATEGORIES,
    unit: ObservationUnit | str = ObservationUnit.OCCURRENCE,
    threshold: float = DEFAULT_THRESHOLD,
    max_workers: int = 1,
) -> pd.DataFrame:
    """Cross-validate the model with features re-encoded at each forecasting year M.

    Every M uses the same seed, so fold assignment and down-sampling are shared and
    rows differ only through the features.
    """
    profiles = list(profiles)
    rows = []
    for m in forecast_years:
        dataset = build_dataset(profiles, labels, m, dummy_categories, unit)
        result = cross_validate(dataset, k, seed, threshold, max_workers)
        metrics = result.metrics
        rows.append(
            {
                "M": m,
                "accuracy": metrics.accuracy,
                "recall": metrics.recall,
                "precision": metrics.precision,
                "f_measure": metrics.f_measure,
                "csi": metrics.csi,
            }
        )
        logger.info(f"M={m}: csi={metrics.csi}, accuracy={metrics.accuracy}")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def fit_full(
    profiles: Iterable[TopicProfile],
    labels: Mapping[str, bool],
    dummy_categories: Sequence[str] = DEFAULT_DUMMY_CATEGORIES,
    unit: ObservationUnit | str = ObservationUnit.OCCURRENCE,
) -> LogisticModel:
    """Fit on every profile with features known at the horizon, without down-sampling."""
    dataset = build_dataset(list(profiles), labels, None, dummy_categories, unit)
    model = fit_logistic(dataset.X, dataset.y, dataset.feature_names)
    logger.info(f"Full model fitted on {len(dataset)} rows in {model.iterations} iterations")
    return model
