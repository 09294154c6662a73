"""Command-line interface for meshtrend."""

import logging
from collections.abc import Callable
from pathlib import Path
from typing import Any

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import __version__
from .analysis.profile import ORGANISMS
from .config import BACKENDS, RunConfig, load_config
from .core import EmergencePipeline
from .exceptions import MeshTrendError
from .fixtures.seed import FixtureSeeder
from .modeling.evaluation import fit_full, sweep_forecast
from .reports import tables
from .reports.writers import ArtifactWriter
from .utils.metadata import RunMetadata

logger = logging.getLogger(__name__)
console = Console()


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@click.group()
@click.option(
    "--config",
    "-c",
    "config_path",
    type=click.Path(path_type=Path),
    help="Run configuration (JSON)",
)
@click.option("--seed", type=int, help="Random seed for down-sampling and folds")
@click.option("--out", "-o", "output_dir", type=click.Path(path_type=Path), help="Output directory")
@click.option("--backend", type=click.Choice(BACKENDS), help="Corpus backend")
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose logging")
@click.version_option(version=__version__, prog_name="meshtrend")
@click.pass_context
def main(ctx, config_path, seed, output_dir, backend, verbose):
    """meshtrend - Trace new MeSH terms, classify their emergence and predict it."""
    _configure_logging(verbose)

    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    ctx.obj["config_path"] = config_path
    ctx.obj["overrides"] = {"seed": seed, "output_dir": output_dir, "backend": backend}


def _load(ctx) -> RunConfig:
    config = load_config(ctx.obj["config_path"])
    return config.with_overrides(**ctx.obj["overrides"])


def _run(ctx, command: str, stages: list[Callable[[EmergencePipeline, ArtifactWriter], Any]]):
    """Run stages against one pipeline and one atomic writer."""
    try:
        config = _load(ctx)
        metadata = RunMetadata.for_run(config, command)
        with EmergencePipeline(config) as pipeline:
            with ArtifactWriter(config.output_dir, metadata) as writer:
                for stage in stages:
                    stage(pipeline, writer)
        click.echo(f"✓ {command}: wrote {len(writer.written)} files to {config.output_dir}")
    except (MeshTrendError, OSError) as e:
        click.echo(f"✗ {command} error: {e}", err=True)
        raise click.Abort()


# Stages


def _select_stage(pipeline: EmergencePipeline, writer: ArtifactWriter) -> None:
    results = pipeline.select_all()
    summary = tables.selection_summary(results)
    writer.write_csv("selection_summary.csv", summary)
    writer.write_csv("selection_exclusions.csv", tables.exclusion_counts(results))
    for year, result in results.items():
        writer.write_csv(
            f"selection_{year}.csv",
            tables.selection_frame(result, pipeline.vocabulary),
        )

    table = Table(title="Selected new terms", show_header=True, header_style="bold green")
    for column in summary.columns:
        table.add_column(column, justify="right")
    for row in summary.itertuples(index=False):
        table.add_row(*(str(v) for v in row))
    console.print(table)


def _counts_stage(pipeline: EmergencePipeline, writer: ArtifactWriter) -> None:
    trends = pipeline.trends()
    writer.write_csv("popularity_counts.csv", tables.counts_frame(trends))
    writer.write_csv("trends.csv", tables.trend_frame(trends))


def _profile_stage(pipeline: EmergencePipeline, writer: ArtifactWriter) -> None:
    writer.write_csv("profiles.csv", tables.profile_frame(pipeline.profiles()))


def _analyze_stage(pipeline: EmergencePipeline, writer: ArtifactWriter) -> None:
    config = pipeline.config
    trends = pipeline.trends()
    profiles = pipeline.profiles()

    writer.write_csv("popularity_description.csv", tables.popularity_description(trends))
    writer.write_csv("most_popular.csv", tables.top_terms(trends, most=True))
    writer.write_csv("least_popular.csv", tables.top_terms(trends, most=False))
    writer.write_csv(
        "most_popular_organisms.csv",
        tables.top_terms(trends, most=True, category=ORGANISMS, profiles=profiles),
    )
    distribution = tables.trend_distribution_frame(trends)
    writer.write_csv("trend_distribution.csv", distribution)
    writer.write_csv("category_shares.csv", tables.category_shares(profiles))

    report: dict[str, Any] = {
        "selected_terms": len(trends),
        "zero_popularity_terms": sum(1 for t in trends.values() if t.summary.total == 0),
        "trend_distribution": {
            row.trend_class: int(row.count) for row in distribution.itertuples(index=False)
        },
        "contingency": {},
        "group_comparisons": {},
    }

    columns_by = {
        "category_quartile": (
            {ui: t.quartile.quartile.value for ui, t in trends.items()},
            tables.QUARTILE_ORDER,
        ),
        "category_trend": (
            {ui: t.trend_class.value for ui, t in trends.items()},
            tables.TREND_ORDER,
        ),
    }
    for name, (column_of, col_labels) in columns_by.items():
        table = tables.category_table(profiles, column_of, col_labels)
        frames, summary = tables.contingency_report(table, config.chi_square_categories, name)
        for frame_name, frame in frames.items():
            writer.write_csv(f"{frame_name}.csv", frame, index=True)
        report["contingency"][name] = summary

    comparisons = {
        "clinical": tables.clinical_groups(trends, profiles),
        "narrower": tables.narrower_groups(trends, profiles),
        "pathogen": tables.pathogen_groups(trends, profiles),
    }
    for name, groups in comparisons.items():
        frame, summary = tables.group_comparison(groups, name)
        writer.write_csv(f"{name}_groups.csv", frame)
        report["group_comparisons"][name] = summary

    writer.write_json("analysis.json", report)


def _train_stage(pipeline: EmergencePipeline, writer: ArtifactWriter) -> None:
    config = pipeline.config
    profiles = list(pipeline.profiles().values())
    labels = pipeline.labels()

    sweep = sweep_forecast(
        profiles,
        labels,
        forecast_years=config.forecast_years,
        k=config.folds,
        seed=config.seed,
        dummy_categories=config.dummy_categories,
        unit=config.observation_unit,
        threshold=config.decision_threshold,
        max_workers=config.max_workers,
    )
    model = fit_full(profiles, labels, config.dummy_categories, config.observation_unit)

    writer.write_csv("forecast_sweep.csv", sweep)
    writer.write_csv("csi_curve.csv", tables.csi_curve(sweep))
    writer.write_csv("full_fit.csv", tables.coefficient_frame(model))
    writer.write_json(
        "model.json",
        {"model": model.to_dict(), "seed": config.seed, "config": config.to_dict()},
    )


def _lag_stage(pipeline: EmergencePipeline, writer: ArtifactWriter) -> None:
    profiles = pipeline.profiles()
    writer.write_csv("lag_stages.csv", tables.lag_table(profiles))
    writer.write_csv("lag_histogram.csv", tables.lag_histogram(profiles))


# Commands


@main.command()
@click.pass_context
def select(ctx):
    """Apply the selection rules to every cohort year."""
    _run(ctx, "select", [_select_stage])


@main.command()
@click.pass_context
def counts(ctx):
    """Materialise yearly major-topic counts and trend classes."""
    _run(ctx, "counts", [_counts_stage])


@main.command()
@click.pass_context
def profile(ctx):
    """Build the topic characteristics of selected terms."""
    _run(ctx, "profile", [_profile_stage])


@main.command()
@click.pass_context
def analyze(ctx):
    """Descriptive statistics, contingency tests and group comparisons."""
    _run(ctx, "analyze", [_analyze_stage])


@main.command()
@click.pass_context
def train(ctx):
    """Cross-validate the emergence model per forecasting year and fit it on all data."""
    _run(ctx, "train", [_train_stage])


@main.command()
@click.pass_context
def lag(ctx):
    """Stage the lag between inclusion and the first clinical trial."""
    _run(ctx, "lag", [_lag_stage])


@main.command(name="all")
@click.pass_context
def run_all(ctx):
    """Run every stage."""
    _run(
        ctx,
        "all",
        [_select_stage, _counts_stage, _profile_stage, _analyze_stage, _train_stage, _lag_stage],
    )


@main.command()
@click.argument("output_dir", type=click.Path(file_okay=False, path_type=Path))
@click.option("--years", "-y", default="2003,2004,2005", help="Comma-separated cohort years")
@click.option("--terms-per-year", "-n", default=100, help="Candidate terms per cohort")
@click.option("--fixture-seed", default=7, help="Seed of the generator")
def fixtures(output_dir: Path, years: str, terms_per_year: int, fixture_seed: int):
    """Write a planted fixture vocabulary, corpus and config."""
    try:
        cohort_years = [int(y) for y in years.split(",") if y.strip()]
        seeder = FixtureSeeder(cohort_years, terms_per_year=terms_per_year, seed=fixture_seed)
        paths = seeder.seed_all(output_dir)
        for name, path in paths.items():
            click.echo(f"✓ {name}: {path}")
    except (MeshTrendError, OSError, ValueError) as e:
        click.echo(f"✗ fixtures error: {e}", err=True)
        raise click.Abort()


if __name__ == "__main__":
    main()
