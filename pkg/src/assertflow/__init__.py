"""AssertFlow: SVA generation pipeline, bounded semantics checker, and
validated training-data synthesis."""

__version__ = "0.1.0"
