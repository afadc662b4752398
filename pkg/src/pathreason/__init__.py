"""Relational reasoning over extracted entity-relation graphs by path enumeration."""

__version__ = "0.1.0"
