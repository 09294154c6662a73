"""Run configuration: file loading, environment overrides and the config hash."""

import hashlib
import json
import logging
import os
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import yaml
from dotenv import load_dotenv

from .analysis.profile import PathogenKeywords
from .analysis.trend import TrendParams
from .corpus.base import DEFAULT_HORIZON_YEAR
from .corpus.live import LiveBackendConfig
from .exceptions import ConfigError
from .modeling.features import DEFAULT_DUMMY_CATEGORIES, ObservationUnit

logger = logging.getLogger(__name__)

BACKENDS = ("fixture", "live")
SECRET_FIELDS = frozenset({"api_key"})
DEFAULT_CHI_SQUARE_CATEGORIES = ("B", "C", "D", "E", "G")

ENV_OVERRIDES = {
    "MESHTREND_API_KEY": ("api_key", str),
    "MESHTREND_BASE_URL": ("base_url", str),
    "MESHTREND_RATE_LIMIT": ("rate_limit", float),
    "MESHTREND_MAX_RETRIES": ("max_retries", int),
}


@dataclass
class RunConfig:
    """Everything one pipeline run depends on."""

    vocabulary_path: Path | None = None
    new_terms_path: Path | None = None
    corpus_path: Path | None = None
    backend: str = "fixture"
    live: LiveBackendConfig = field(default_factory=LiveBackendConfig)
    cache_path: Path | None = None
    horizon_year: int = DEFAULT_HORIZON_YEAR
    trend: TrendParams = field(default_factory=TrendParams)
    keywords: PathogenKeywords = field(default_factory=PathogenKeywords)
    dummy_categories: tuple[str, ...] = DEFAULT_DUMMY_CATEGORIES
    observation_unit: ObservationUnit = ObservationUnit.OCCURRENCE
    forecast_years: tuple[int, ...] = tuple(range(1, 11))
    folds: int = 5
    seed: int = 42
    decision_threshold: float = 0.5
    chi_square_categories: tuple[str, ...] = DEFAULT_CHI_SQUARE_CATEGORIES
    strict_vocabulary: bool = True
    output_dir: Path = Path("results")
    max_workers: int = 1

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {', '.join(BACKENDS)}, got {self.backend!r}")
        if self.folds < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if not self.forecast_years or min(self.forecast_years) < 1:
            raise ConfigError("forecast_years must be a nonempty list of years >= 1")
        if not 0.0 < self.decision_threshold < 1.0:
            raise ConfigError(
                f"decision_threshold must lie in (0, 1), got {self.decision_threshold}"
            )
        if self.max_workers < 1:
            raise ConfigError(f"max_workers must be >= 1, got {self.max_workers}")
        self.observation_unit = ObservationUnit(self.observation_unit)

    def require_inputs(self) -> None:
        """Check that the configured input paths are set for the chosen backend."""
        missing = [
            name
            for name in ("vocabulary_path", "new_terms_path")
            if getattr(self, name) is None
        ]
        if self.backend == "fixture" and self.corpus_path is None:
            missing.append("corpus_path")
        if missing:
            raise ConfigError(f"Missing required config entries: {', '.join(missing)}")

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with non-None overrides applied (CLI flags)."""
        values = {k: v for k, v in overrides.items() if v is not None}
        if "output_dir" in values:
            values["output_dir"] = Path(values["output_dir"])
        return replace(self, **values)

    def to_dict(self, include_secrets: bool = False) -> dict[str, Any]:
        """Plain JSON-ready view; secrets are left out unless asked for."""
        live = {
            k: v
            for k, v in asdict(self.live).items()
            if include_secrets or k not in SECRET_FIELDS
        }
        return {
            "vocabulary_path": _path_str(self.vocabulary_path),
            "new_terms_path": _path_str(self.new_terms_path),
            "corpus_path": _path_str(self.corpus_path),
            "backend": self.backend,
            "live": live,
            "cache_path": _path_str(self.cache_path),
            "horizon_year": self.horizon_year,
            "trend": asdict(self.trend),
            "pathogen_keywords": {
                "human_markers": list(self.keywords.human_markers),
                "nonhuman_markers": list(self.keywords.nonhuman_markers),
                "marker": self.keywords.marker,
            },
            "dummy_categories": list(self.dummy_categories),
            "observation_unit": self.observation_unit.value,
            "forecast_years": list(self.forecast_years),
            "folds": self.folds,
            "seed": self.seed,
            "decision_threshold": self.decision_threshold,
            "chi_square_categories": list(self.chi_square_categories),
            "strict_vocabulary": self.strict_vocabulary,
        }

    @property
    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of the non-secret settings.

        The output directory and worker count do not change results and are not
        hashed.
        """
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _path_str(path: Path | None) -> str | None:
    return None if path is None else path.as_posix()


def _resolve(value: Any, base_dir: Path) -> Path | None:
    if value is None:
        return None
    path = Path(value).expanduser()
    return path if path.is_absolute() else base_dir / path


def _live_config(data: Mapping[str, Any]) -> LiveBackendConfig:
    known = {f.name for f in fields(LiveBackendConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"Unknown live backend settings: {', '.join(sorted(unknown))}")
    return LiveBackendConfig(**data)


def _apply_env(live: LiveBackendConfig) -> LiveBackendConfig:
    overrides = {}
    for variable, (name, cast) in ENV_OVERRIDES.items():
        value = os.getenv(variable)
        if value:
            try:
                overrides[name] = cast(value)
            except ValueError:
                raise ConfigError(f"{variable}={value!r} is not a valid {cast.__name__}")
    return replace(live, **overrides) if overrides else live


def config_from_mapping(data: Mapping[str, Any], base_dir: Path | None = None) -> RunConfig:
    """Build a RunConfig from parsed settings; relative paths resolve against base_dir."""
    base_dir = base_dir or Path.cwd()
    data = dict(data)

    known = {f.name for f in fields(RunConfig)} | {"pathogen_keywords", "keywords_path"}
    known -= {"keywords"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"Unknown config entries: {', '.join(sorted(unknown))}")

    kwargs: dict[str, Any] = {}
    for name in ("vocabulary_path", "new_terms_path", "corpus_path", "cache_path"):
        kwargs[name] = _resolve(data.pop(name, None), base_dir)
    if "output_dir" in data:
        kwargs["output_dir"] = _resolve(data.pop("output_dir"), base_dir)

    try:
        kwargs["live"] = _apply_env(_live_config(data.pop("live", None) or {}))
        kwargs["trend"] = TrendParams(**(data.pop("trend", None) or {}))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid setting: {e}")

    keywords_path = _resolve(data.pop("keywords_path", None), base_dir)
    inline_keywords = data.pop("pathogen_keywords", None)
    if keywords_path is not None and inline_keywords is not None:
        raise ConfigError("Give either pathogen_keywords or keywords_path, not both")
    if keywords_path is not None:
        kwargs["keywords"] = PathogenKeywords.from_file(keywords_path)
    elif inline_keywords is not None:
        kwargs["keywords"] = PathogenKeywords.from_mapping(inline_keywords)

    for name in ("dummy_categories", "chi_square_categories"):
        if name in data:
            kwargs[name] = tuple(str(c) for c in data.pop(name))
    if "forecast_years" in data:
        kwargs["forecast_years"] = tuple(int(m) for m in data.pop("forecast_years"))

    kwargs.update(data)
    try:
        return RunConfig(**kwargs)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid config: {e}")


def load_config(config_path: str | Path | None = None) -> RunConfig:
    """Load a run configuration.

    The file is a JSON document (YAML is accepted too). Secrets come from the
    environment or a .env file: MESHTREND_API_KEY, and optionally
    MESHTREND_BASE_URL, MESHTREND_RATE_LIMIT and MESHTREND_MAX_RETRIES.

    Args:
        config_path: Config file; None gives defaults plus environment overrides

    Returns:
        The validated configuration
    """
    load_dotenv()

    if config_path is None:
        return config_from_mapping({})

    config_path = Path(config_path)
    if not config_path.exists():
        raise FileNotFoundError(f"File not found: {config_path}")

    with open(config_path, encoding="utf-8") as f:
        try:
            data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{config_path}: cannot parse config: {e}")
    if not isinstance(data, Mapping):
        raise ConfigError(f"{config_path}: config must be a mapping")

    config = config_from_mapping(data, base_dir=config_path.resolve().parent)
    logger.info(f"Loaded config {config_path} ({config.config_hash[:12]})")
    return config
