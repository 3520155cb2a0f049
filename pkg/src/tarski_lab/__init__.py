"""Query-model laboratory for Tarski fixed points on the k-dimensional grid."""

__version__ = "0.1.0"
