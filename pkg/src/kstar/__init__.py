"""Exact workbench comparing star products on GL(2)."""

__version__ = "0.1.0"
