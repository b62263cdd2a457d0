"""Exception types shared across the library."""


class ClusteringError(Exception):
    """Base class for errors raised by this package."""


class DataError(ClusteringError):
    """Invalid input data: empty sets, ragged rows, non-numeric or non-finite values."""


class SeedBudgetError(ClusteringError):
    """The seed lattice would exceed the configured safety cap."""


class NoClustersError(ClusteringError):
    """Every candidate centroid was pruned; nothing survived to model."""
