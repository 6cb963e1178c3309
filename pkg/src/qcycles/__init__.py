"""Cycle-spectrum experiments on percolated hypercubes."""

__version__ = "0.1.0"

from .cube import Edge, OrientedSubcube, Subcube
from .sampling import ExplicitInstance, KeepModel, PercolationSample, TriPartition

__all__ = [
    "Edge",
    "OrientedSubcube",
    "Subcube",
    "ExplicitInstance",
    "KeepModel",
    "PercolationSample",
    "TriPartition",
    "__version__",
]
