"""designlint: design-guideline lint and repair engine for frontend pages."""

__version__ = "0.1.0"
