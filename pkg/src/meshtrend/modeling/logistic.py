"""Logistic regression fitted by iteratively reweighted least squares."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd
from scipy import special

from ..exceptions import (
    DimensionMismatchError,
    InsufficientDataError,
    NonConvergenceError,
    SeparationError,
    SingleClassError,
)

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-8
STEP_TOLERANCE = 1e-10
MAX_ITERATIONS = 100
SEPARATION_BOUND = 15.0


def significance_marker(p_value: float) -> str:
    """Significance code: *** p<0.001, ** p<0.01, * p<0.05."""
    if p_value < 0.001:
        return "***"
    if p_value < 0.01:
        return "**"
    if p_value < 0.05:
        return "*"
    return ""


@dataclass(frozen=True, eq=False)
class LogisticModel:
    """Fitted coefficients (intercept first) with Wald inference."""

    feature_names: tuple[str, ...]
    coefficients: np.ndarray
    std_errors: np.ndarray
    z_values: np.ndarray
    p_values: np.ndarray
    log_likelihood: float
    converged: bool
    iterations: int

    def __post_init__(self):
        sizes = {
            len(self.feature_names),
            len(self.coefficients),
            len(self.std_errors),
            len(self.z_values),
            len(self.p_values),
        }
        if len(sizes) != 1:
            raise DimensionMismatchError("Model vectors must all have the same length")

    @property
    def odds_ratios(self) -> np.ndarray:
        return np.exp(self.coefficients)

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self.feature_names.index(name)])

    def coefficient_table(self) -> pd.DataFrame:
        """One row per variable: coeff, std_error, z, p, signif, odds_ratio."""
        return pd.DataFrame(
            {
                "variable": list(self.feature_names),
                "coeff": self.coefficients,
                "std_error": self.std_errors,
                "z": self.z_values,
                "p": self.p_values,
                "signif": [significance_marker(p) for p in self.p_values],
                "odds_ratio": self.odds_ratios,
            }
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "feature_names": list(self.feature_names),
            "coefficients": self.coefficients.tolist(),
            "std_errors": self.std_errors.tolist(),
            "z_values": self.z_values.tolist(),
            "p_values": self.p_values.tolist(),
            "log_likelihood": self.log_likelihood,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def log_likelihood(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    """Bernoulli log-likelihood, computed with log1p(exp) in a stable form."""
    z = X @ beta
    return float(np.sum(y * z - np.logaddexp(0.0, z)))


def score(beta: np.ndarray, X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of the log-likelihood, X^T (y - pi)."""
    return X.T @ (y - special.expit(X @ beta))


def fisher_information(beta: np.ndarray, X: np.ndarray) -> np.ndarray:
    """X^T W X with W = diag(pi (1 - pi))."""
    pi = special.expit(X @ beta)
    weights = pi * (1.0 - pi)
    return X.T @ (X * weights[:, None])


def _check_inputs(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2:
        raise DimensionMismatchError(f"Design matrix must be 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DimensionMismatchError(f"Labels shape {y.shape} does not match {X.shape[0]} rows")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("Labels must be 0 or 1")
    if y.min() == y.max():
        raise SingleClassError("Labels contain a single class")
    if X.shape[0] < X.shape[1] + 1:
        raise InsufficientDataError(
            f"Need at least {X.shape[1] + 1} rows for {X.shape[1]} columns, got {X.shape[0]}"
        )
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise NonConvergenceError("Design matrix is rank deficient")


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    feature_names: Sequence[str] | None = None,
    gradient_tolerance: float = GRADIENT_TOLERANCE,
    step_tolerance: float = STEP_TOLERANCE,
    max_iterations: int = MAX_ITERATIONS,
    separation_bound: float = SEPARATION_BOUND,
) -> LogisticModel:
    """Fit a logistic regression by IRLS and compute Wald statistics.

    Each iteration solves (X^T W X) delta = X^T (y - pi) and updates beta by delta.
    Iteration stops when the largest gradient component is at most
    ``gradient_tolerance`` or the step norm is at most ``step_tolerance``.

    Args:
        X: Design matrix; include an intercept column if one is wanted
        y: 0/1 labels
        feature_names: Column names, defaults to x0..xk

    Raises:
        SingleClassError: y has one class
        InsufficientDataError: fewer rows than columns + 1
        NonConvergenceError: singular information matrix or iteration cap reached
        SeparationError: a coefficient diverged past ``separation_bound``
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_inputs(X, y)
    names = tuple(feature_names) if feature_names is not None else tuple(
        f"x{j}" for j in range(X.shape[1])
    )
    if len(names) != X.shape[1]:
        raise DimensionMismatchError(f"{len(names)} names for {X.shape[1]} columns")

    beta = np.zeros(X.shape[1])
    converged = False
    iterations = 0

    for iterations in range(1, max_iterations + 1):
        gradient = score(beta, X, y)
        if np.max(np.abs(gradient)) <= gradient_tolerance:
            converged = True
            break
        try:
            step = np.linalg.solve(fisher_information(beta, X), gradient)
        except np.linalg.LinAlgError as e:
            raise NonConvergenceError(
                f"Singular information matrix at iteration {iterations}"
            ) from e
        beta = beta + step
        if np.max(np.abs(beta)) > separation_bound:
            gradient = score(beta, X, y)
            if np.max(np.abs(gradient)) > gradient_tolerance:
                raise SeparationError(
                    f"Coefficient exceeded {separation_bound} at iteration {iterations}; "
                    "data look separated",
                    coefficients=beta.copy(),
                )
        if np.linalg.norm(step) <= step_tolerance:
            converged = True
            break

    if not converged:
        raise NonConvergenceError(f"IRLS did not converge in {max_iterations} iterations")

    logger.debug(f"IRLS converged after {iterations} iterations")
    return _wald_model(names, beta, X, y, iterations)


def _wald_model(
    names: tuple[str, ...],
    beta: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    iterations: int,
) -> LogisticModel:
    try:
        covariance = np.linalg.inv(fisher_information(beta, X))
    except np.linalg.LinAlgError as e:
        raise NonConvergenceError("Information matrix is singular at the optimum") from e
    std_errors = np.sqrt(np.diag(covariance))
    z_values = beta / std_errors
    p_values = np.clip(2.0 * special.ndtr(-np.abs(z_values)), 0.0, 1.0)
    return LogisticModel(
        feature_names=names,
        coefficients=beta,
        std_errors=std_errors,
        z_values=z_values,
        p_values=p_values,
        log_likelihood=log_likelihood(beta, X, y),
        converged=True,
        iterations=iterations,
    )


def predict_prob(model: LogisticModel, x: Sequence[float] | np.ndarray) -> float | np.ndarray:
    """Probability of emergence for one feature row or a matrix of rows.

    Rows hold the predictors only; the intercept is implicit. expit neither
    overflows nor returns NaN for linear predictors up to |z| = 700.
    """
    x = np.asarray(x, dtype=float)
    expected = len(model.coefficients) - 1
    if x.ndim not in (1, 2) or x.shape[-1] != expected:
        raise DimensionMismatchError(f"Expected {expected} features, got shape {x.shape}")
    z = model.coefficients[0] + x @ model.coefficients[1:]
    probabilities = special.expit(z)
    return float(probabilities) if x.ndim == 1 else probabilities


def predict_with(coefficients: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Probabilities from a raw coefficient vector."""
    return special.expit(np.asarray(X, dtype=float) @ coefficients)
