"""Emergence prediction: feature encoding, logistic regression and evaluation."""

from .evaluation import (
    CrossValidationResult,
    FoldRecord,
    Metrics,
    cross_validate,
    downsample,
    evaluate,
    fit_full,
    stratified_folds,
    sweep_forecast,
)
from .features import (
    DEFAULT_DUMMY_CATEGORIES,
    Dataset,
    FeatureVector,
    ObservationUnit,
    build_dataset,
    encode_features,
    feature_names,
)
from .logistic import LogisticModel, fit_logistic, predict_prob, significance_marker

__all__ = [
    "DEFAULT_DUMMY_CATEGORIES",
    "CrossValidationResult",
    "Dataset",
    "FeatureVector",
    "FoldRecord",
    "LogisticModel",
    "Metrics",
    "ObservationUnit",
    "build_dataset",
    "cross_validate",
    "downsample",
    "encode_features",
    "evaluate",
    "feature_names",
    "fit_full",
    "fit_logistic",
    "predict_prob",
    "significance_marker",
    "stratified_folds",
    "sweep_forecast",
]
