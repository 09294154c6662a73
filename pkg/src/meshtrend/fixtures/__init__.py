"""Planted fixture generation."""

from .seed import FixtureSeeder, PlantedTerm

__all__ = ["FixtureSeeder", "PlantedTerm"]
