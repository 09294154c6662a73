"""Provenance stamped onto every emitted artifact."""

from dataclasses import dataclass
from typing import Any

from .. import __version__
from ..config import RunConfig


@dataclass(frozen=True)
class RunMetadata:
    """Config hash, seed and command behind an artifact.

    No timestamps are recorded, so reruns with the same inputs produce identical
    bytes.
    """

    config_sha256: str
    seed: int
    command: str
    backend: str
    version: str = __version__

    @classmethod
    def for_run(cls, config: RunConfig, command: str) -> "RunMetadata":
        return cls(
            config_sha256=config.config_hash,
            seed=config.seed,
            command=command,
            backend=config.backend,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "config_sha256": self.config_sha256,
            "seed": self.seed,
            "command": self.command,
            "backend": self.backend,
            "version": self.version,
        }

    def header_lines(self) -> list[str]:
        """Comment lines written ahead of CSV content."""
        return [f"# {key}: {value}" for key, value in self.to_dict().items()]
