"""Shared exception base for the package."""


class DesignLintError(Exception):
    """Base class for all designlint domain errors."""
