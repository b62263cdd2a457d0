"""Grid-seeded local Gaussian clustering.

Points are indexed for box queries, candidate centers seeded on a lattice
walk to their local means with collision pruning, each survivor gets a
self-consistent density-weighted Gaussian, and points are assigned by
argmax density with optional quality filters.
"""

from .assign import (
    DROPPED,
    FilterParams,
    Labeling,
    assign_all,
    filter_percent,
    filter_pvalue,
    filter_separation,
)
from .centroids import (
    Centroid,
    SeedParams,
    collides,
    converge_all,
    prune_low_count,
    resolve_collisions,
    seed_grid,
    update_centroid,
)
from .errors import ClusteringError, DataError, NoClustersError, SeedBudgetError
from .gaussian import (
    DENSITY_FORMS,
    FitParams,
    GaussianModel,
    WeightUnderflowWarning,
    covariance_plain,
    covariance_weighted,
    density,
    density_many,
    fit_covariance,
)
from .io import load_model, read_points, save_model, write_labels, write_report
from .pipeline import ClusterConfig, ClusterStats, RunReport, run, suggest_window
from .spatial import AxisBox, Bounds, PointSet, SpatialIndex, build
from .testkit import BlobSpec, adjusted_rand, gen_blobs

__version__ = "0.1.0"

__all__ = [
    "AxisBox",
    "BlobSpec",
    "Bounds",
    "Centroid",
    "ClusterConfig",
    "ClusterStats",
    "ClusteringError",
    "DENSITY_FORMS",
    "DROPPED",
    "DataError",
    "FilterParams",
    "FitParams",
    "GaussianModel",
    "Labeling",
    "NoClustersError",
    "PointSet",
    "RunReport",
    "SeedBudgetError",
    "SeedParams",
    "SpatialIndex",
    "WeightUnderflowWarning",
    "adjusted_rand",
    "assign_all",
    "build",
    "collides",
    "converge_all",
    "covariance_plain",
    "covariance_weighted",
    "density",
    "density_many",
    "filter_percent",
    "filter_pvalue",
    "filter_separation",
    "fit_covariance",
    "gen_blobs",
    "load_model",
    "prune_low_count",
    "read_points",
    "resolve_collisions",
    "run",
    "save_model",
    "seed_grid",
    "suggest_window",
    "update_centroid",
    "write_labels",
    "write_report",
    "__version__",
]
