"""Exact random-walk quantities on graphs and mechanical checks of their bounds."""

__version__ = "0.1.0"
