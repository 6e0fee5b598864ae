"""Multi-location program repair workbench for MiniLang."""

__version__ = "0.1.0"
