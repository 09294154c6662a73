"""Report tables and the atomic artifact writer."""

from .writers import ArtifactWriter, read_artifact_csv

__all__ = ["ArtifactWriter", "read_artifact_csv"]
