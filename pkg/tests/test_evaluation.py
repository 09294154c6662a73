"""Tests for feature encoding, down-sampling, cross-validation and the sweep."""

import numpy as np
import pytest

from meshtrend.analysis.profile import PathogenClass, TopicProfile
from meshtrend.exceptions import DimensionMismatchError, InsufficientDataError
from meshtrend.modeling.evaluation import (
    SWEEP_COLUMNS,
    Metrics,
    cross_validate,
    downsample,
    evaluate,
    fit_full,
    stratified_folds,
    sweep_forecast,
)
from meshtrend.modeling.features import (
    ObservationUnit,
    build_dataset,
    encode_features,
    feature_names,
)


def make_profile(ui, categories=("D",), clinical_first_year=None, narrower=False, year=2005):
    categories = frozenset(categories)
    return TopicProfile(
        ui=ui,
        year_added=year,
        categories=categories,
        has_narrower=narrower,
        clinical_first_year=clinical_first_year,
        pathogen=PathogenClass.NON_PATHOGEN if "B" in categories else None,
    )


def synthetic_profiles(n, seed, clinical_effect=True, lag=0):
    """Profiles whose label depends on clinical significance (or on nothing)."""
    rng = np.random.default_rng(seed)
    letters = ["B", "C", "D", "E", "G"]
    profiles, labels = [], {}
    for i in range(n):
        ui = f"U{i:04d}"
        clinical = bool(rng.random() < 0.5)
        category = letters[int(rng.integers(0, len(letters)))]
        profiles.append(
            make_profile(
                ui,
                categories=(category,),
                clinical_first_year=2005 + lag if clinical else None,
                narrower=bool(rng.random() < 0.3),
            )
        )
        rate = (0.6 if clinical else 0.1) if clinical_effect else 0.3
        labels[ui] = bool(rng.random() < rate)
    return profiles, labels


class TestEncodeFeatures:
    """Test cases for the forecasting-year encoding."""

    def test_clinical_not_yet_known(self):
        profile = make_profile("U1", clinical_first_year=2007)

        assert encode_features(profile, 1).clinical == 0

    def test_clinical_known_at_m3(self):
        profile = make_profile("U1", clinical_first_year=2007)

        assert encode_features(profile, 3).clinical == 1

    def test_reference_category(self):
        vector = encode_features(make_profile("U1", categories=("E",)), 1)

        assert vector.category_dummies == (0, 0, 0)

    def test_multi_hot(self):
        vector = encode_features(make_profile("U1", categories=("B", "D")), 1)

        assert vector.category_dummies == (1, 0, 1)

    def test_horizon_encoding(self):
        profile = make_profile("U1", clinical_first_year=2018)

        assert encode_features(profile, None).clinical == 1

    def test_m_must_be_positive(self):
        with pytest.raises(ValueError):
            encode_features(make_profile("U1"), 0)

    def test_row_order_matches_names(self):
        vector = encode_features(make_profile("U1", ("C",), 2005, narrower=True), 1)

        assert feature_names() == (
            "(Intercept)",
            "NarrowerTerm",
            "Category_Organisms (B)",
            "Category_Diseases (C)",
            "Category_Chemicals & Drugs (D)",
            "ClinicalSignificance",
        )
        assert vector.as_row() == (1.0, 0.0, 1.0, 0.0, 1.0)


class TestBuildDataset:
    def test_occurrence_rows(self):
        """Test that a two-category term yields two single-category rows."""
        profiles = [make_profile("A", ("D", "E")), make_profile("B", ("C",))]

        dataset = build_dataset(profiles, {"A": True, "B": False})

        assert dataset.groups == ("A", "A", "B")
        np.testing.assert_array_equal(dataset.y, [1, 1, 0])
        np.testing.assert_array_equal(dataset.X[:, 0], 1.0)
        np.testing.assert_array_equal(dataset.X[0, 2:5], [0, 0, 1])
        np.testing.assert_array_equal(dataset.X[1, 2:5], [0, 0, 0])

    def test_term_rows(self):
        profiles = [make_profile("A", ("D", "E")), make_profile("B", ("C",))]

        dataset = build_dataset(profiles, {"A": True, "B": False}, unit=ObservationUnit.TERM)

        assert dataset.groups == ("A", "B")
        assert dataset.term_labels() == {"A": 1, "B": 0}

    def test_rows_sorted_by_ui(self):
        profiles = [make_profile("Z"), make_profile("A")]

        dataset = build_dataset(profiles, {"A": False, "Z": True})

        assert dataset.groups == ("A", "Z")


class TestMetrics:
    """Test cases for evaluate and the derived ratios."""

    def test_perfect_predictions(self):
        metrics = evaluate([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0])

        assert metrics.accuracy == 1.0
        assert metrics.csi == 1.0

    def test_csi_formula(self):
        assert Metrics.from_counts(tp=3, fp=2, fn=5, tn=0).csi == 0.3

    def test_threshold_is_inclusive(self):
        metrics = evaluate([0.5], [1])

        assert metrics.tp == 1

    def test_undefined_ratios_are_none(self):
        metrics = evaluate([0.1, 0.2], [0, 0])

        assert metrics.precision is None
        assert metrics.recall is None
        assert metrics.f_measure is None
        assert metrics.csi is None
        assert metrics.accuracy == 1.0

    def test_algebraic_identities(self):
        """Test accuracy, F-measure and the CSI bound on random outcomes."""
        rng = np.random.default_rng(17)
        for _ in range(500):
            n = int(rng.integers(1, 50))
            metrics = evaluate(rng.random(n), rng.integers(0, 2, size=n))

            assert metrics.accuracy == pytest.approx((metrics.tp + metrics.tn) / n)
            if metrics.f_measure is not None:
                harmonic = 2 / (1 / metrics.precision + 1 / metrics.recall)
                assert metrics.f_measure == pytest.approx(harmonic)
            if metrics.csi is not None and metrics.precision is not None and metrics.recall:
                assert metrics.csi <= min(metrics.precision, metrics.recall) + 1e-12

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            evaluate([0.1, 0.2], [1])

    def test_pooling(self):
        pooled = Metrics.from_counts(1, 2, 3, 4) + Metrics.from_counts(4, 3, 2, 1)

        assert (pooled.tp, pooled.fp, pooled.fn, pooled.tn) == (5, 5, 5, 5)
        assert pooled.accuracy == 0.5


class TestDownsample:
    """Test cases for training-set balancing."""

    @pytest.fixture()
    def examples(self):
        return [("pos", i) for i in range(10)] + [("neg", i) for i in range(30)]

    def is_positive(self, example):
        return example[0] == "pos"

    def test_sizes(self, examples):
        subset = downsample(examples, self.is_positive, seed=7)

        assert sum(self.is_positive(e) for e in subset) == 10
        assert len(subset) == 20

    def test_reproducible(self, examples):
        assert downsample(examples, self.is_positive, 7) == downsample(
            examples, self.is_positive, 7
        )

    def test_seed_changes_sample(self, examples):
        assert downsample(examples, self.is_positive, 7) != downsample(
            examples, self.is_positive, 8
        )

    def test_fewer_negatives(self):
        examples = [("pos", i) for i in range(10)] + [("neg", i) for i in range(4)]

        subset = downsample(examples, self.is_positive, 7)

        assert subset == examples

    def test_no_positives(self):
        with pytest.raises(InsufficientDataError):
            downsample([("neg", 1)], self.is_positive, 7)

    def test_keeps_input_order(self, examples):
        subset = downsample(examples, self.is_positive, 3)

        assert subset == sorted(subset, key=examples.index)


class TestStratifiedFolds:
    def test_each_class_spread_evenly(self):
        labels = {f"P{i}": 1 for i in range(10)} | {f"N{i}": 0 for i in range(23)}

        folds = stratified_folds(labels, 5, seed=1)

        for k in range(5):
            members = [ui for ui, fold in folds.items() if fold == k]
            assert sum(labels[ui] for ui in members) == 2
            assert sum(1 - labels[ui] for ui in members) in (4, 5)

    def test_deterministic(self):
        labels = {f"U{i}": i % 3 == 0 for i in range(30)}
        labels = {ui: int(v) for ui, v in labels.items()}

        assert stratified_folds(labels, 5, 9) == stratified_folds(labels, 5, 9)


class TestCrossValidate:
    """Test cases for stratified cross-validation."""

    def test_perfect_feature(self):
        """Test that a label equal to the clinical feature is predicted perfectly."""
        rng = np.random.default_rng(5)
        profiles, labels = [], {}
        for i in range(200):
            clinical = bool(rng.random() < 0.3)
            ui = f"U{i:03d}"
            profiles.append(make_profile(ui, clinical_first_year=2005 if clinical else None))
            labels[ui] = clinical

        dataset = build_dataset(profiles, labels, forecast_year=1)
        result = cross_validate(dataset, k=5, seed=42)

        assert result.metrics.accuracy == 1.0

    def test_same_seed_same_metrics(self):
        profiles, labels = synthetic_profiles(300, seed=1)
        dataset = build_dataset(profiles, labels, forecast_year=1)

        assert cross_validate(dataset, seed=4).metrics == cross_validate(dataset, seed=4).metrics

    def test_threads_do_not_change_results(self):
        profiles, labels = synthetic_profiles(300, seed=2)
        dataset = build_dataset(profiles, labels, forecast_year=1)

        serial = cross_validate(dataset, seed=4)
        threaded = cross_validate(dataset, seed=4, max_workers=4)

        assert serial.metrics == threaded.metrics

    def test_fold_bookkeeping(self):
        """Test that no test-fold term is trained on and every term is tested once."""
        profiles, labels = synthetic_profiles(250, seed=3)
        dataset = build_dataset(profiles, labels, forecast_year=1)

        result = cross_validate(dataset, k=5, seed=11)

        tested = [ui for record in result.folds for ui in record.test_terms]
        assert sorted(tested) == sorted(labels)
        for record in result.folds:
            assert not record.train_terms & record.test_terms
            train_labels = [labels[ui] for ui in record.train_terms]
            assert sum(train_labels) == len(train_labels) - sum(train_labels)
        pooled = result.metrics
        assert pooled.tp + pooled.fp + pooled.fn + pooled.tn == len(dataset)

    def test_constant_clinical_column_dropped(self):
        """Test that a column without variation is dropped and predicted with zero weight."""
        profiles, labels = synthetic_profiles(200, seed=4, lag=5)
        dataset = build_dataset(profiles, labels, forecast_year=1)

        result = cross_validate(dataset, k=5, seed=1)

        assert all("ClinicalSignificance" in r.dropped_columns for r in result.folds)

    def test_independent_labels_accuracy(self):
        """Test that uninformative features give no discrimination and no gain over the majority.

        Training folds are balanced, so the predicted-positive rate is not pulled
        toward the majority class; what must hold is that positives and negatives
        are flagged at the same rate and accuracy does not beat the majority rate.
        """
        profiles, labels = synthetic_profiles(2000, seed=6, clinical_effect=False)
        dataset = build_dataset(profiles, labels, forecast_year=1)

        metrics = cross_validate(dataset, seed=42).metrics

        true_positive_rate = metrics.tp / (metrics.tp + metrics.fn)
        false_positive_rate = metrics.fp / (metrics.fp + metrics.tn)
        assert abs(true_positive_rate - false_positive_rate) < 0.08
        majority = max(np.mean(dataset.y), 1 - np.mean(dataset.y))
        assert metrics.accuracy <= majority + 0.05

    def test_too_few_per_class(self):
        profiles = [make_profile(f"U{i}") for i in range(10)]
        labels = {p.ui: i < 3 for i, p in enumerate(profiles)}

        with pytest.raises(InsufficientDataError):
            cross_validate(build_dataset(profiles, labels, 1), k=5)

    def test_k_must_be_at_least_two(self):
        profiles, labels = synthetic_profiles(50, seed=1)

        with pytest.raises(ValueError):
            cross_validate(build_dataset(profiles, labels, 1), k=1)


class TestSweepForecast:
    """Test cases for the forecasting-year sweep."""

    def test_schema_and_years(self):
        profiles, labels = synthetic_profiles(200, seed=8)

        sweep = sweep_forecast(profiles, labels, forecast_years=range(1, 11))

        assert list(sweep.columns) == SWEEP_COLUMNS
        assert list(sweep["M"]) == list(range(1, 11))

    def test_m_independent_features(self):
        """Test that rows are equal when no feature changes with M."""
        profiles, labels = synthetic_profiles(200, seed=9, lag=0)

        sweep = sweep_forecast(profiles, labels, forecast_years=[1, 4, 9])

        for column in SWEEP_COLUMNS[1:]:
            assert sweep[column].nunique() == 1

    def test_late_clinical_evidence_improves_recall(self):
        """Test that evidence arriving at lag 5 lifts recall from M=1 to M=6."""
        profiles, labels = synthetic_profiles(400, seed=10, lag=5)

        sweep = sweep_forecast(profiles, labels, forecast_years=[1, 6]).set_index("M")

        assert sweep.loc[6, "recall"] > sweep.loc[1, "recall"]
        assert sweep.loc[6, "csi"] > sweep.loc[1, "csi"]
        assert sweep.loc[6, "accuracy"] > sweep.loc[1, "accuracy"]


class TestFitFull:
    def test_planted_clinical_effect(self):
        """Test that a planted clinical effect gives a positive, significant coefficient."""
        profiles, labels = synthetic_profiles(600, seed=12)

        model = fit_full(profiles, labels)
        table = model.coefficient_table().set_index("variable")

        assert table.loc["ClinicalSignificance", "coeff"] > 0
        assert table.loc["ClinicalSignificance", "p"] < 0.01
