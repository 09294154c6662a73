"""Tests for the command-line interface."""

import json
from collections import Counter

import pytest
from click.testing import CliRunner

from meshtrend.cli import main
from meshtrend.reports.writers import read_artifact_csv


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def invoke(runner, planted_config, tmp_path):
    """Run a command against the planted config, writing to ``out`` under tmp_path."""

    def run(*args, out="out"):
        return runner.invoke(
            main,
            ["--config", str(planted_config), "--out", str(tmp_path / out), *args],
        )

    return run


class TestSelectCommand:
    def test_summary(self, invoke, tmp_path):
        result = invoke("select")

        assert result.exit_code == 0, result.output
        assert "✓ select" in result.output
        summary = read_artifact_csv(tmp_path / "out" / "selection_summary.csv")
        assert list(summary["Year"]) == [2003, 2004, 2005]
        assert list(summary["# of New MeSH"]) == [100, 100, 100]
        assert list(summary["# of selected"]) == [96, 96, 96]

    def test_per_year_dispositions(self, invoke, tmp_path):
        invoke("select")

        frame = read_artifact_csv(tmp_path / "out" / "selection_2004.csv")

        assert len(frame) == 100
        assert (frame["disposition"] == "excluded").sum() == 4

    def test_missing_vocabulary(self, runner, planted_config, tmp_path):
        document = json.loads(planted_config.read_text())
        document["vocabulary_path"] = str(tmp_path / "nowhere.jsonl")
        broken = tmp_path / "broken.json"
        broken.write_text(json.dumps(document))

        result = runner.invoke(main, ["--config", str(broken), "select"])

        assert result.exit_code != 0
        assert "nowhere.jsonl" in result.output
        assert not list((tmp_path / "results").glob("*.csv"))

    def test_missing_config(self, runner, tmp_path):
        result = runner.invoke(main, ["--config", str(tmp_path / "absent.json"), "select"])

        assert result.exit_code != 0
        assert "absent.json" in result.output


class TestTrainCommand:
    """Test cases for the cross-validation sweep and full fit outputs."""

    def test_deterministic_outputs(self, invoke, tmp_path):
        """Test that two runs with the same seed write byte-identical files."""
        first = invoke("train", out="first")
        second = invoke("train", out="second")

        assert first.exit_code == 0, first.output
        assert second.exit_code == 0, second.output
        for name in ("forecast_sweep.csv", "full_fit.csv", "csi_curve.csv", "model.json"):
            assert (tmp_path / "first" / name).read_bytes() == (
                tmp_path / "second" / name
            ).read_bytes()

    def test_clinical_coefficient(self, invoke, tmp_path):
        invoke("train")

        table = read_artifact_csv(tmp_path / "out" / "full_fit.csv").set_index("variable")

        assert table.loc["ClinicalSignificance", "coeff"] > 0
        assert table.loc["ClinicalSignificance", "p"] < 0.01

    def test_late_evidence_raises_csi(self, invoke, tmp_path):
        """Test that clinical trials planted five years after inclusion lift CSI at M=10."""
        invoke("train")

        sweep = read_artifact_csv(tmp_path / "out" / "forecast_sweep.csv").set_index("M")

        assert list(sweep.index) == list(range(1, 11))
        assert sweep.loc[10, "csi"] > sweep.loc[1, "csi"]

    def test_model_metadata(self, invoke, tmp_path):
        invoke("train")

        document = json.loads((tmp_path / "out" / "model.json").read_text())

        assert document["metadata"]["command"] == "train"
        assert document["metadata"]["seed"] == 42
        assert document["seed"] == 42
        assert "api_key" not in document["config"]["live"]

    def test_seed_override(self, runner, planted_config, tmp_path):
        result = runner.invoke(
            main,
            ["--config", str(planted_config), "--seed", "5", "--out", str(tmp_path), "train"],
        )

        assert result.exit_code == 0, result.output
        document = json.loads((tmp_path / "model.json").read_text())
        assert document["metadata"]["seed"] == 5


@pytest.fixture()
def designed_config(tmp_path, write_jsonl):
    """Sixteen terms of one cohort, ranked by popularity with alternating categories.

    The eight most popular terms have a clinical trial; every quartile holds two
    Diseases and two Chemicals terms.
    """
    root = tmp_path / "designed"
    root.mkdir()
    years = (2010, 2011, 2012)
    uis = [f"D2{i:05d}" for i in range(1, 17)]
    per_year = {ui: 17 - rank for rank, ui in enumerate(uis, start=1)}

    records = [
        {
            "ui": ui,
            "label": f"Designed Term {rank}",
            "year_added": 2010,
            "tree_numbers": [f"{'C' if rank % 2 else 'D'}01.{rank:03d}"],
            "annotation": "",
            "scope_note": "",
            "previously_indexing": [],
            "deleted": False,
        }
        for rank, ui in enumerate(uis, start=1)
    ]
    articles = []
    for year in years:
        for j in range(max(per_year.values())):
            articles.append(
                {
                    "pmid": str(len(articles) + 1),
                    "year": year,
                    "pub_types": ["Journal Article"],
                    "headings": [{"ui": ui, "major": True} for ui, n in per_year.items() if n > j],
                }
            )
    articles.append(
        {
            "pmid": str(len(articles) + 1),
            "year": 2011,
            "pub_types": ["Journal Article", "Clinical Trial"],
            "headings": [{"ui": ui, "major": False} for ui in uis[:8]],
        }
    )

    write_jsonl(root / "vocabulary.jsonl", records)
    write_jsonl(root / "corpus.jsonl", articles)
    (root / "new_terms.json").write_text(json.dumps({"2010": uis}), encoding="utf-8")
    config_file = root / "config.json"
    config_file.write_text(
        json.dumps(
            {
                "vocabulary_path": "vocabulary.jsonl",
                "new_terms_path": "new_terms.json",
                "corpus_path": "corpus.jsonl",
                "backend": "fixture",
                "horizon_year": 2012,
                "output_dir": str(tmp_path / "designed_results"),
            }
        ),
        encoding="utf-8",
    )
    return config_file


class TestAnalyzeCommand:
    def test_trend_distribution_matches_planted(self, invoke, tmp_path, planted_fixture):
        planted = Counter(t["trend"] for t in planted_fixture["manifest"]["terms"].values())

        result = invoke("analyze")

        assert result.exit_code == 0, result.output
        frame = read_artifact_csv(tmp_path / "out" / "trend_distribution.csv")
        assert frame["count"].sum() == 288
        for row in frame.itertuples(index=False):
            assert row.count == planted.get(row.trend_class, 0), row.trend_class
        emerged = frame["share_of_emerged"].dropna()
        assert len(emerged) == 3
        assert emerged.sum() == pytest.approx(100.0)

        analysis = json.loads((tmp_path / "out" / "analysis.json").read_text())
        expected = {k: planted.get(k, 0) for k in analysis["trend_distribution"]}
        assert analysis["trend_distribution"] == expected

    def test_disjoint_clinical_popularity(self, runner, designed_config, tmp_path):
        """Test that clinical terms with all the top totals give a significant difference."""
        result = runner.invoke(main, ["--config", str(designed_config), "analyze"])

        assert result.exit_code == 0, result.output
        out = tmp_path / "designed_results"
        comparisons = json.loads((out / "analysis.json").read_text())["group_comparisons"]
        assert comparisons["clinical"]["test"]["p_value"] < 0.01
        assert comparisons["narrower"]["test"] is None
        groups = read_artifact_csv(out / "clinical_groups.csv").set_index("group")
        assert groups.loc["Clinical", "min"] > groups.loc["Non-clinical", "max"]

    def test_independent_categories_have_zero_residuals(self, runner, designed_config, tmp_path):
        result = runner.invoke(main, ["--config", str(designed_config), "analyze"])

        assert result.exit_code == 0, result.output
        out = tmp_path / "designed_results"
        residuals = read_artifact_csv(out / "category_quartile_residuals.csv")
        assert residuals.iloc[:, 0].tolist() == ["C", "D"]
        assert residuals.iloc[:, 1:].to_numpy() == pytest.approx(0.0, abs=1e-12)

        contingency = json.loads((out / "analysis.json").read_text())["contingency"]
        assert contingency["category_quartile"]["test"]["p_value"] == pytest.approx(1.0)
        assert contingency["category_trend"]["test"] is None
        assert not (out / "category_trend_residuals.csv").exists()


class TestOtherCommands:
    def test_lag_stages(self, invoke, tmp_path, planted_fixture):
        """Test that every planted lag of five lands in Stage3."""
        clinical = sum(t["clinical"] for t in planted_fixture["manifest"]["terms"].values())

        result = invoke("lag")

        assert result.exit_code == 0, result.output
        stages = read_artifact_csv(tmp_path / "out" / "lag_stages.csv").set_index("stage")
        assert stages.loc["Stage3", "count"] == clinical
        assert stages.loc["Stage3", "percentage"] == 100.0
        assert stages["cumulative_percentage"].iloc[-1] == 100.0

    def test_counts(self, invoke, tmp_path, planted_fixture):
        invoke("counts")

        trends = read_artifact_csv(tmp_path / "out" / "trends.csv")

        assert len(trends) == len(planted_fixture["manifest"]["terms"])
        assert trends.groupby("year_added")["emerging"].sum().tolist() == [24, 24, 24]

    def test_all(self, invoke, tmp_path):
        result = invoke("all")

        assert result.exit_code == 0, result.output
        out = tmp_path / "out"
        for name in (
            "selection_summary.csv",
            "trends.csv",
            "profiles.csv",
            "analysis.json",
            "category_quartile_table.csv",
            "forecast_sweep.csv",
            "lag_stages.csv",
        ):
            assert (out / name).exists(), name
        assert not list(out.glob(".staging-*"))

        analysis = json.loads((out / "analysis.json").read_text())
        assert analysis["selected_terms"] == 288
        assert analysis["metadata"]["command"] == "all"

    def test_fixtures(self, runner, tmp_path):
        result = runner.invoke(main, ["fixtures", str(tmp_path / "fx"), "-y", "2004", "-n", "20"])

        assert result.exit_code == 0, result.output
        assert "✓ corpus" in result.output
        new_terms = json.loads((tmp_path / "fx" / "new_terms.json").read_text())
        assert len(new_terms["2004"]) == 20

    def test_fixtures_invalid(self, runner, tmp_path):
        result = runner.invoke(main, ["fixtures", str(tmp_path / "fx"), "-n", "3"])

        assert result.exit_code != 0
        assert "✗ fixtures error" in result.output

    def test_version(self, runner):
        result = runner.invoke(main, ["--version"])

        assert result.exit_code == 0
        assert "meshtrend" in result.output
