"""Point container and spatial index for axis-aligned box queries.

Queries use closed-box semantics: a point is inside a box when
``|x[a] - center[a]| <= half_width`` on every axis. The index is immutable
once built, so concurrent read-only queries are safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError


@dataclass(frozen=True)
class PointSet:
    """N points of dimension K held as a float64 array of shape (N, K).

    Point ids are the 0-based row order of the input and never change.
    Construction rejects empty input and non-finite coordinates.
    """

    points: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.points, dtype=np.float64)
        if arr.ndim != 2:
            raise DataError(f"points must be a 2-d array, got shape {arr.shape}")
        if arr.shape[0] == 0:
            raise DataError("point set is empty")
        bad = np.flatnonzero(~np.isfinite(arr).all(axis=1))
        if bad.size:
            raise DataError(f"non-finite coordinate in row {bad[0]}")
        object.__setattr__(self, "points", arr)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def k(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class Bounds:
    """Per-axis closed bounds of a point set."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=np.float64)
        hi = np.asarray(self.max, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("bounds must be matching 1-d arrays")
        if np.any(lo > hi):
            raise ValueError("bounds min exceeds max")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @property
    def span(self) -> np.ndarray:
        return self.max - self.min

    @classmethod
    def of(cls, points: PointSet) -> "Bounds":
        return cls(points.points.min(axis=0), points.points.max(axis=0))


@dataclass(frozen=True)
class AxisBox:
    """Axis-aligned closed box given by its center and a shared half width."""

    center: np.ndarray
    half_width: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64)
        if c.ndim != 1:
            raise ValueError("box center must be a 1-d array")
        if not np.isfinite(c).all():
            raise ValueError("box center must be finite")
        if not (self.half_width > 0) or not np.isfinite(self.half_width):
            raise ValueError("half_width must be positive and finite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "half_width", float(self.half_width))


class SpatialIndex:
    """Bulk-built spatial index over a fixed point set.

    Backed by a balanced k-d tree; box queries run as L-infinity ball
    lookups, which match the closed-box predicate bit for bit.

    Attributes
    ----------
    points : PointSet
        The indexed points.
    bounds : Bounds
        Exact per-axis min/max, computed during the build.
    """

    def __init__(self, points: PointSet):
        self.points = points
        self.bounds = Bounds.of(points)
        self._tree = cKDTree(points.points, balanced_tree=True)

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def k(self) -> int:
        return self.points.k

    def _check_dim(self, center: np.ndarray) -> None:
        if center.shape[-1] != self.k:
            raise ValueError(
                f"query dimension {center.shape[-1]} does not match index dimension {self.k}"
            )

    def range_query(self, box: AxisBox) -> np.ndarray:
        """Ids of all points inside the closed box, ascending."""
        self._check_dim(box.center)
        ids = self._tree.query_ball_point(box.center, r=box.half_width, p=np.inf)
        out = np.asarray(ids, dtype=np.int64)
        out.sort()
        return out

    def count_in_box(self, box: AxisBox) -> int:
        """Number of points inside the closed box."""
        self._check_dim(box.center)
        return int(
            self._tree.query_ball_point(
                box.center, r=box.half_width, p=np.inf, return_length=True
            )
        )

    def count_many(self, centers: np.ndarray, half_width: float) -> np.ndarray:
        """Counts for many same-sized boxes at once; one row per center."""
        centers = np.asarray(centers, dtype=np.float64)
        self._check_dim(centers)
        return self._tree.query_ball_point(
            centers, r=half_width, p=np.inf, return_length=True
        ).astype(np.int64)

    def query_many(self, centers: np.ndarray, half_width: float) -> list:
        """Member id arrays for many same-sized boxes, each ascending."""
        centers = np.asarray(centers, dtype=np.float64)
        self._check_dim(centers)
        raw = self._tree.query_ball_point(centers, r=half_width, p=np.inf)
        out = []
        for ids in raw:
            a = np.asarray(ids, dtype=np.int64)
            a.sort()
            out.append(a)
        return out


def build(points: PointSet) -> SpatialIndex:
    """Build an index over the point set, computing bounds in the same pass."""
    if not isinstance(points, PointSet):
        points = PointSet(np.asarray(points))
    return SpatialIndex(points)
