"""Utility modules for meshtrend."""

from .metadata import RunMetadata

__all__ = ["RunMetadata"]
