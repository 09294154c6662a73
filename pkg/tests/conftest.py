"""
Pytest configuration and fixtures for meshtrend tests.
"""

import json
import os
import re
import shutil
import tempfile
from pathlib import Path

import httpx
import pytest

from meshtrend.config import ENV_OVERRIDES
from meshtrend.corpus.base import CLINICAL_TRIAL, Article, Heading
from meshtrend.corpus.fixture import FixtureCorpus
from meshtrend.fixtures.seed import FixtureSeeder
from meshtrend.thesaurus.records import TermRecord


@pytest.fixture(scope="session")
def temp_dir():
    """Create a temporary directory for test files."""
    temp_path = tempfile.mkdtemp()
    yield Path(temp_path)
    shutil.rmtree(temp_path)


@pytest.fixture(scope="session")
def planted_fixture(temp_dir):
    """Generate the planted fixture once: 3 cohorts of 100 candidates each."""
    seeder = FixtureSeeder(cohort_years=(2003, 2004, 2005), terms_per_year=100, seed=7)
    paths = seeder.seed_all(temp_dir / "planted")
    manifest = json.loads(paths["manifest"].read_text(encoding="utf-8"))
    return {"paths": paths, "manifest": manifest, "seeder": seeder}


@pytest.fixture()
def planted_config(planted_fixture, tmp_path):
    """A config file for the planted fixture writing into a fresh output directory."""
    paths = planted_fixture["paths"]
    document = json.loads(paths["config"].read_text(encoding="utf-8"))
    for key in ("vocabulary", "new_terms", "corpus"):
        document[f"{key}_path"] = str(paths[key])
    document["output_dir"] = str(tmp_path / "results")

    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps(document), encoding="utf-8")
    return config_file


@pytest.fixture()
def make_term():
    """Factory for term records with sensible defaults."""

    def factory(ui, year=2006, tree_numbers=("D01.001",), **extra):
        return TermRecord(
            ui=ui,
            label=extra.pop("label", f"Term {ui}"),
            year_added=year,
            tree_numbers=tuple(tree_numbers),
            **extra,
        )

    return factory


@pytest.fixture()
def make_article():
    """Factory for articles: ``major`` and ``minor`` list the tagged uis."""
    counter = {"pmid": 0}

    def factory(year, major=(), minor=(), clinical=False, pmid=None):
        counter["pmid"] += 1
        headings = tuple(Heading(ui, True) for ui in major) + tuple(
            Heading(ui, False) for ui in minor
        )
        pub_types = {"Journal Article", CLINICAL_TRIAL} if clinical else {"Journal Article"}
        return Article(
            pmid=str(pmid if pmid is not None else counter["pmid"]),
            year=year,
            pub_types=frozenset(pub_types),
            headings=headings,
        )

    return factory


@pytest.fixture()
def empty_corpus():
    return FixtureCorpus([])


@pytest.fixture()
def write_jsonl():
    """Write dicts as JSON lines and return the path."""

    def writer(path, items):
        with open(path, "w", encoding="utf-8") as f:
            for item in items:
                f.write(json.dumps(item) + "\n")
        return path

    return writer


# Custom pytest markers
def pytest_configure(config):
    """Configure custom pytest markers."""
    config.addinivalue_line("markers", "benchmark: mark test as benchmark/performance test")
    config.addinivalue_line("markers", "slow: mark test as slow running")


def pytest_collection_modifyitems(config, items):
    """Add markers based on test names."""
    for item in items:
        if "benchmark" in item.nodeid.lower() or "performance" in item.nodeid.lower():
            item.add_marker(pytest.mark.benchmark)

        if any(keyword in item.nodeid.lower() for keyword in ["end_to_end", "sweep", "planted"]):
            item.add_marker(pytest.mark.slow)


# Environment-based test skipping
def pytest_runtest_setup(item):
    """Skip benchmark tests unless specifically requested."""
    if "benchmark" in item.keywords:
        if os.getenv("BENCHMARK_TESTS", "").lower() not in ("1", "true", "yes"):
            pytest.skip("Benchmark tests disabled. Set BENCHMARK_TESTS=1 to enable.")


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Keep live-backend overrides from the developer's shell out of tests."""
    for variable in ENV_OVERRIDES:
        monkeypatch.delenv(variable, raising=False)
    yield


ESEARCH_TERM = re.compile(
    r'^"(?P<label>.+)"\[(?P<field>MAJR|MeSH Terms):noexp\]'
    r"(?P<clinical> AND clinical trial\[pt\])?"
    r" AND (?P<start>\d{4})(?::(?P<end>\d{4}))?\[dp\]$"
)


class EsearchOracle:
    """Answers esearch count requests by scanning a list of articles."""

    def __init__(self, articles, labels):
        self.articles = list(articles)
        self.uis = {label: ui for ui, label in labels.items()}
        self.requests = []

    def count(self, term):
        match = ESEARCH_TERM.match(term)
        assert match, f"unexpected esearch term {term!r}"
        ui = self.uis.get(match["label"])
        start = int(match["start"])
        end = int(match["end"] or start)
        total = 0
        for article in self.articles:
            if not start <= article.year <= end:
                continue
            if match["clinical"]:
                total += article.is_clinical_trial and ui in article.all_uis
            else:
                total += ui in article.major_uis
        return total

    def __call__(self, request):
        term = request.url.params["term"]
        self.requests.append(term)
        return httpx.Response(200, json={"esearchresult": {"count": str(self.count(term))}})


@pytest.fixture()
def esearch_oracle():
    """Factory for a mock transport backed by an article scan."""

    def factory(articles, labels):
        oracle = EsearchOracle(articles, labels)
        return oracle, httpx.MockTransport(oracle)

    return factory
