"""Multi-reference distributionally robust optimization with dynamic source trust."""

__version__ = "0.1.0"
