"""Artifact writer: stage every output of a command and promote them together."""

import json
import logging
import math
import os
import shutil
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from ..utils.metadata import RunMetadata

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return _clean_float(float(value))
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, Path):
        return value.as_posix()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _clean_float(value: float) -> float | None:
    return None if math.isnan(value) or math.isinf(value) else value


def _clean(value: Any) -> Any:
    """Replace NaN/inf with None so the JSON stays standard."""
    if isinstance(value, float):
        return _clean_float(value)
    if isinstance(value, dict):
        return {str(k.value if isinstance(k, Enum) else k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


class ArtifactWriter:
    """Collect a command's outputs in a staging directory.

    Files become visible in ``output_dir`` only when the ``with`` block exits
    cleanly; on error the staging directory is removed and nothing is promoted.
    CSV files start with ``# key: value`` metadata lines and JSON files carry a
    ``metadata`` object.
    """

    def __init__(self, output_dir: str | Path, metadata: RunMetadata):
        self.output_dir = Path(output_dir)
        self.metadata = metadata
        self._staging: Path | None = None
        self._written: list[str] = []

    def __enter__(self) -> "ArtifactWriter":
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self._staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=self.output_dir))
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        staging = self._staging
        self._staging = None
        if staging is None:
            return
        try:
            if exc_type is None:
                for name in self._written:
                    target = self.output_dir / name
                    target.parent.mkdir(parents=True, exist_ok=True)
                    os.replace(staging / name, target)
                logger.info(f"Wrote {len(self._written)} artifacts to {self.output_dir}")
            else:
                logger.warning(f"Discarding staged outputs after error: {exc_val}")
        finally:
            shutil.rmtree(staging, ignore_errors=True)

    @property
    def written(self) -> list[str]:
        return list(self._written)

    def _stage_path(self, name: str) -> Path:
        if self._staging is None:
            raise RuntimeError("ArtifactWriter must be used as a context manager")
        if name in self._written:
            raise ValueError(f"Artifact {name} written twice")
        path = self._staging / name
        path.parent.mkdir(parents=True, exist_ok=True)
        self._written.append(name)
        return path

    def write_csv(self, name: str, frame: pd.DataFrame, index: bool = False) -> None:
        path = self._stage_path(name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            for line in self.metadata.header_lines():
                f.write(line + "\n")
            frame.to_csv(f, index=index, lineterminator="\n", float_format=FLOAT_FORMAT)

    def write_json(self, name: str, payload: dict[str, Any]) -> None:
        path = self._stage_path(name)
        document = {"metadata": self.metadata.to_dict(), **payload}
        text = json.dumps(_clean(document), indent=2, default=_json_default, allow_nan=False)
        path.write_text(text + "\n", encoding="utf-8")


def read_artifact_csv(path: str | Path) -> pd.DataFrame:
    """Read a CSV written by ArtifactWriter, skipping its metadata lines."""
    skip = 0
    with open(path, encoding="utf-8") as f:
        for line in f:
            if not line.startswith("# "):
                break
            skip += 1
    return pd.read_csv(path, skiprows=skip)
