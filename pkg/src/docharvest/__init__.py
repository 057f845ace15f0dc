"""Harvest, screen and layout-annotate Word documents found in web crawls."""

__version__ = "0.1.0"
