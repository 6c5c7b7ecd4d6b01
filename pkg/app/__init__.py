"""App package."""

