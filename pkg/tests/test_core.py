"""Tests for the EmergencePipeline and run configuration."""

import json
from dataclasses import replace
from pathlib import Path

import httpx
import pytest

from meshtrend.analysis.trend import TrendClass
from meshtrend.config import RunConfig, config_from_mapping, load_config
from meshtrend.core import EmergencePipeline
from meshtrend.corpus.fixture import iter_articles
from meshtrend.exceptions import ConfigError
from meshtrend.thesaurus.records import read_vocabulary


@pytest.fixture()
def pipeline(planted_config):
    with EmergencePipeline(load_config(planted_config)) as pipeline:
        yield pipeline


class TestEmergencePipeline:
    """Test cases for the pipeline stages on the planted fixture."""

    def test_selection_per_cohort(self, pipeline):
        results = pipeline.select_all()

        assert list(results) == [2003, 2004, 2005]
        for result in results.values():
            assert result.candidate_count == 100
            assert len(result.selected) == 96

    def test_exclusion_reasons(self, pipeline, planted_fixture):
        excluded = {
            ui: reason.value
            for result in pipeline.select_all().values()
            for ui, reason in result.excluded
        }

        assert excluded == planted_fixture["manifest"]["exclusions"]

    def test_boundary_term_selected_with_zero_counts(self, pipeline, planted_fixture):
        """Test that a term first indexed five years before inclusion is kept."""
        planted = planted_fixture["manifest"]["terms"]
        trends = pipeline.trends()

        zero_boundary = [
            ui
            for ui, term in planted.items()
            if term["trend"] == TrendClass.NOT_YET_EMERGED.value and trends[ui].summary.total == 0
        ]

        assert len(zero_boundary) >= 3
        for ui in zero_boundary:
            assert trends[ui].trend_class is TrendClass.NOT_YET_EMERGED

    def test_trends_match_planted_patterns(self, pipeline, planted_fixture):
        planted = planted_fixture["manifest"]["terms"]

        trends = pipeline.trends()

        assert set(trends) == set(planted)
        for ui, trend in trends.items():
            assert trend.trend_class.value == planted[ui]["trend"], ui

    def test_series_span_to_horizon(self, pipeline):
        for trend in pipeline.trends().values():
            assert trend.series.start_year == trend.year_added
            assert trend.series.end_year == pipeline.config.horizon_year

    def test_top_quartile_nests_with_hot_terms(self, pipeline, planted_fixture):
        """Test that Q4 and the planted hot terms nest within every cohort."""
        planted = planted_fixture["manifest"]["terms"]
        labels = pipeline.labels()

        for year in (2003, 2004, 2005):
            cohort = [ui for ui, term in planted.items() if term["year_added"] == year]
            q4 = {ui for ui in cohort if labels[ui]}
            hot = {ui for ui in cohort if planted[ui]["hot"]}

            assert len(q4) == 24
            assert q4 <= hot or hot <= q4

    def test_profiles_match_planted_facts(self, pipeline, planted_fixture):
        planted = planted_fixture["manifest"]["terms"]
        lag = planted_fixture["manifest"]["clinical_lag"]

        profiles = pipeline.profiles()

        for ui, profile in profiles.items():
            term = planted[ui]
            assert profile.categories == set(term["categories"])
            assert profile.has_narrower == term["has_narrower"]
            assert profile.clinical_significance == term["clinical"]
            if term["clinical"]:
                assert profile.lag == lag
            assert (profile.pathogen is not None) == ("B" in term["categories"])

    def test_worker_count_does_not_change_results(self, planted_config):
        config = load_config(planted_config)
        with EmergencePipeline(config) as serial:
            expected = {ui: t.trend_class for ui, t in serial.trends().items()}
        with EmergencePipeline(replace(config, max_workers=4)) as threaded:
            actual = {ui: t.trend_class for ui, t in threaded.trends().items()}

        assert actual == expected

    def test_live_backend_matches_fixture(self, planted_config, planted_fixture, esearch_oracle):
        """Test the planted pipeline over a mocked esearch backend against the fixture."""
        paths = planted_fixture["paths"]
        db = read_vocabulary(paths["vocabulary"], paths["new_terms"])
        with open(paths["corpus"], encoding="utf-8") as f:
            articles = list(iter_articles(f))
        oracle, transport = esearch_oracle(articles, {term.ui: term.label for term in db})

        fixture_config = load_config(planted_config)
        live_config = replace(
            fixture_config,
            backend="live",
            live=replace(fixture_config.live, rate_limit=100000.0),
        )

        with EmergencePipeline(fixture_config) as offline:
            expected_trends = {ui: t.series.counts for ui, t in offline.trends().items()}
            expected_profiles = offline.profiles()
        with httpx.Client(transport=transport) as client:
            with EmergencePipeline(live_config, http_client=client) as online:
                actual_trends = {ui: t.series.counts for ui, t in online.trends().items()}
                actual_profiles = online.profiles()

        assert actual_trends == expected_trends
        assert actual_profiles == expected_profiles
        assert oracle.requests

    def test_horizon_before_cohort(self, planted_config):
        config = replace(load_config(planted_config), horizon_year=2004)

        with pytest.raises(ConfigError, match="horizon_year"):
            _ = EmergencePipeline(config).vocabulary

    def test_missing_inputs(self):
        with pytest.raises(ConfigError, match="vocabulary_path"):
            EmergencePipeline(RunConfig()).select_all()

    def test_missing_vocabulary_file(self, planted_config, tmp_path):
        config = replace(load_config(planted_config), vocabulary_path=tmp_path / "absent.jsonl")

        with pytest.raises(FileNotFoundError, match="absent.jsonl"):
            _ = EmergencePipeline(config).vocabulary


class TestRunConfig:
    """Test cases for configuration loading."""

    def test_relative_paths_resolve_against_file(self, planted_fixture):
        config = load_config(planted_fixture["paths"]["config"])

        assert config.vocabulary_path == planted_fixture["paths"]["vocabulary"].resolve()
        assert config.output_dir == planted_fixture["paths"]["config"].resolve().parent / "results"

    def test_defaults(self):
        config = config_from_mapping({})

        assert config.backend == "fixture"
        assert config.folds == 5
        assert config.seed == 42
        assert config.forecast_years == tuple(range(1, 11))
        assert config.dummy_categories == ("B", "C", "D")

    def test_unknown_entry(self):
        with pytest.raises(ConfigError, match="colour"):
            config_from_mapping({"colour": "blue"})

    def test_unknown_live_setting(self):
        with pytest.raises(ConfigError, match="proxy"):
            config_from_mapping({"live": {"proxy": "x"}})

    @pytest.mark.parametrize(
        "entry",
        [
            {"backend": "ftp"},
            {"folds": 1},
            {"forecast_years": [0, 1]},
            {"decision_threshold": 1.0},
            {"trend": {"threshold": 0}},
            {"observation_unit": "sentence"},
        ],
    )
    def test_invalid_values(self, entry):
        with pytest.raises(ConfigError):
            config_from_mapping(entry)

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("MESHTREND_API_KEY", "secret-key")
        monkeypatch.setenv("MESHTREND_RATE_LIMIT", "7.5")

        config = config_from_mapping({"live": {"rate_limit": 2}})

        assert config.live.api_key == "secret-key"
        assert config.live.effective_rate == 7.5

    def test_invalid_environment_value(self, monkeypatch):
        monkeypatch.setenv("MESHTREND_MAX_RETRIES", "many")

        with pytest.raises(ConfigError, match="MESHTREND_MAX_RETRIES"):
            config_from_mapping({})

    def test_secrets_not_hashed(self, monkeypatch):
        plain = config_from_mapping({})
        monkeypatch.setenv("MESHTREND_API_KEY", "secret-key")
        keyed = config_from_mapping({})

        assert "api_key" not in keyed.to_dict()["live"]
        assert keyed.to_dict(include_secrets=True)["live"]["api_key"] == "secret-key"
        assert keyed.config_hash == plain.config_hash

    def test_hash_tracks_settings(self):
        base = config_from_mapping({"seed": 1})

        assert base.config_hash == config_from_mapping({"seed": 1}).config_hash
        assert base.config_hash != config_from_mapping({"seed": 2}).config_hash
        assert base.config_hash == base.with_overrides(output_dir="elsewhere").config_hash

    def test_overrides_skip_none(self):
        config = config_from_mapping({"seed": 3}).with_overrides(seed=None, output_dir="out")

        assert config.seed == 3
        assert config.output_dir == Path("out")

    def test_keywords_file(self, tmp_path):
        (tmp_path / "keywords.yml").write_text("human_markers: [people]\nnonhuman_markers: []\n")

        config = config_from_mapping({"keywords_path": "keywords.yml"}, base_dir=tmp_path)

        assert config.keywords.human_markers == ("people",)

    def test_keywords_given_twice(self, tmp_path):
        with pytest.raises(ConfigError):
            config_from_mapping(
                {"keywords_path": "k.yml", "pathogen_keywords": {"human_markers": []}},
                base_dir=tmp_path,
            )

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.json")

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps([1, 2]))

        with pytest.raises(ConfigError, match="mapping"):
            load_config(path)

    def test_example_config_loads(self):
        path = Path(__file__).resolve().parents[1] / "config" / "meshtrend.example.json"

        config = load_config(path)

        assert config.backend == "fixture"
        assert config.cache_path == path.parent / "data" / "esearch-cache.json"
        assert config.live.request_budget == 200000
