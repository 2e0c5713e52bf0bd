"""optboard: analysis engine and dashboard backend for hyperparameter-optimization runs."""

__version__ = "0.1.0"
