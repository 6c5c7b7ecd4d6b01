"""Models package."""

