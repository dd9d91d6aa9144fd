"""Read-only figure rendering for loggas CSV/JSON run outputs."""

__version__ = "0.1.0"
