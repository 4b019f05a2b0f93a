"""High-precision tools for the Flint Hills series and its relatives."""

from .precision import PrecisionContext, PrecisionError, make_context

__version__ = "0.1.0"

__all__ = ["PrecisionContext", "PrecisionError", "make_context", "__version__"]
