"""Density-based point assignment and the post-assignment quality filters.

Every point gets the cluster whose density is highest at that point.
Filters only ever move points from a cluster to DROPPED, never between
clusters, and each filter sees only the survivors of the previous one.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gaussian import GaussianModel, density_many
from .spatial import PointSet

DROPPED = -1


@dataclass
class FilterParams:
    """Optional cutoffs; None disables a filter.

    min_density drops points whose winning density is below the cutoff.
    trim_fraction drops the lowest-density floor(fraction * N_c) points of
    each cluster. min_separation drops points whose top-two density ratio
    P1 / (P1 + P2) falls below the cutoff; the ratio never goes below 1/2,
    so cutoffs under 0.5 are legal but drop nothing.
    """

    min_density: Optional[float] = None
    trim_fraction: Optional[float] = None
    min_separation: Optional[float] = None

    def __post_init__(self):
        if self.min_density is not None and self.min_density < 0:
            raise ValueError("min_density must be >= 0")
        if self.trim_fraction is not None and not (0.0 <= self.trim_fraction < 1.0):
            raise ValueError("trim_fraction must lie in [0, 1)")
        if self.min_separation is not None and not (0.0 <= self.min_separation <= 1.0):
            raise ValueError("min_separation must lie in [0, 1]")


@dataclass
class Labeling:
    """Per-point cluster labels plus the full point-by-cluster density table."""

    labels: np.ndarray
    densities: np.ndarray

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.densities.shape[1]

    @property
    def n_dropped(self) -> int:
        return int(np.count_nonzero(self.labels == DROPPED))

    def top_density(self) -> np.ndarray:
        """Winning (maximum) density per point; unchanged by the filters."""
        return self.densities.max(axis=1)

    def replaced(self, labels: np.ndarray) -> "Labeling":
        return Labeling(labels=labels, densities=self.densities)


def assign_all(
    points: PointSet,
    models: list,
    form: str = "standard",
    threads: int = 1,
) -> Labeling:
    """Assign every point to the argmax-density cluster.

    Ties take the lowest cluster id. Models are read-only here, so columns
    of the density table may be computed in parallel.
    """
    if not models:
        raise ValueError("assignment needs at least one model")
    x = points.points
    dens = np.empty((points.n, len(models)), dtype=np.float64)

    def fill(c: int) -> None:
        dens[:, c] = density_many(x, models[c], form)

    if threads > 1 and len(models) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(len(models))))
    else:
        for c in range(len(models)):
            fill(c)

    labels = np.argmax(dens, axis=1).astype(np.int64)
    return Labeling(labels=labels, densities=dens)


def filter_pvalue(labeling: Labeling, min_density: float) -> Labeling:
    """Drop survivors whose winning density is below the cutoff."""
    labels = labeling.labels.copy()
    keep = labels != DROPPED
    low = labeling.top_density() < min_density
    labels[keep & low] = DROPPED
    return labeling.replaced(labels)


def filter_percent(labeling: Labeling, trim_fraction: float) -> Labeling:
    """Per cluster, drop the floor(fraction * N_c) lowest-density members.

    Members are ordered by winning density ascending with a stable sort, so
    ties at the cut boundary drop the lower point id first.
    """
    labels = labeling.labels.copy()
    top = labeling.top_density()
    for c in range(labeling.n_clusters):
        ids = np.flatnonzero(labels == c)
        if ids.size == 0:
            continue
        n_drop = math.floor(trim_fraction * ids.size)
        if n_drop == 0:
            continue
        order = np.argsort(top[ids], kind="stable")
        labels[ids[order[:n_drop]]] = DROPPED
    return labeling.replaced(labels)


def filter_separation(labeling: Labeling, min_separation: float) -> Labeling:
    """Drop survivors whose top-two density ratio is below the cutoff.

    The ratio is P1 / (P1 + P2) for the two largest densities in the
    point's row; P2 == 0 counts as a ratio of 1. With a single cluster
    there is no runner-up and the filter is a no-op.
    """
    if labeling.n_clusters < 2:
        return labeling.replaced(labeling.labels.copy())
    labels = labeling.labels.copy()
    part = np.partition(labeling.densities, labeling.n_clusters - 2, axis=1)
    p1 = part[:, -1]
    p2 = part[:, -2]
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(p2 == 0.0, 1.0, p1 / (p1 + p2))
    keep = labels != DROPPED
    labels[keep & (ratio < min_separation)] = DROPPED
    return labeling.replaced(labels)


def apply_filters(labeling: Labeling, params: FilterParams) -> tuple:
    """Run the enabled filters in order; returns (labeling, drop counts)."""
    drops = {"density": 0, "percent": 0, "separation": 0}
    if params.min_density is not None:
        before = labeling.n_dropped
        labeling = filter_pvalue(labeling, params.min_density)
        drops["density"] = labeling.n_dropped - before
    if params.trim_fraction is not None:
        before = labeling.n_dropped
        labeling = filter_percent(labeling, params.trim_fraction)
        drops["percent"] = labeling.n_dropped - before
    if params.min_separation is not None:
        before = labeling.n_dropped
        labeling = filter_separation(labeling, params.min_separation)
        drops["separation"] = labeling.n_dropped - before
    return labeling, drops
