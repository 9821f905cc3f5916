"""Functional-data clustering of facial-motion indicator curves against
House-Brackmann grades."""

__version__ = "0.1.0"
