"""Synthetic data and independent oracles used by the test suite.

Nothing here shares implementation code with the modules it checks: the
range oracle is a linear scan, the weighted covariance is a plain double
loop with its own density arithmetic, and the adjusted Rand score is
computed straight from the contingency table.

Sampling uses numpy's PCG64 generator (``np.random.default_rng``); streams
are reproducible for a fixed seed and numpy version. Blob draws are
standard normals pushed through the Cholesky factor of each covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assign import DROPPED
from .spatial import AxisBox, PointSet


@dataclass(frozen=True)
class BlobSpec:
    """One Gaussian blob: mean vector, SPD covariance, sample count."""

    mean: np.ndarray
    sigma: np.ndarray
    count: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        sigma = np.asarray(self.sigma, dtype=np.float64)
        if mean.ndim != 1:
            raise ValueError("mean must be a 1-d array")
        if sigma.shape != (mean.size, mean.size):
            raise ValueError("sigma shape must match the mean dimension")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma", sigma)

    @classmethod
    def isotropic(cls, mean, std: float, count: int) -> "BlobSpec":
        mean = np.asarray(mean, dtype=np.float64)
        return cls(mean=mean, sigma=(std * std) * np.eye(mean.size), count=count)


def gen_blobs(seed: int, specs: list) -> tuple:
    """Sample the blobs in order; returns (PointSet, ground-truth labels).

    Rows are concatenated in the order the blobs are given, so point ids
    follow the blob layout. Raises ValueError when a covariance is not SPD.
    """
    rng = np.random.default_rng(seed)
    chunks = []
    labels = []
    for b, spec in enumerate(specs):
        try:
            factor = np.linalg.cholesky(spec.sigma)
        except np.linalg.LinAlgError as exc:
            raise ValueError(f"blob {b} covariance is not SPD") from exc
        z = rng.standard_normal((spec.count, spec.mean.size))
        chunks.append(spec.mean + z @ factor.T)
        labels.append(np.full(spec.count, b, dtype=np.int64))
    return PointSet(np.concatenate(chunks, axis=0)), np.concatenate(labels)


def brute_force_range(points: PointSet, box: AxisBox) -> np.ndarray:
    """Linear-scan oracle for closed-box queries; ids ascending."""
    inside = np.all(np.abs(points.points - box.center) <= box.half_width, axis=1)
    return np.flatnonzero(inside).astype(np.int64)


def naive_weighted_cov(
    member_ids, points: PointSet, mu, input_model, form: str = "standard"
) -> np.ndarray:
    """Double-loop weighted covariance oracle with its own density math.

    Only reads mu and sigma off input_model; the inverse, the exponent, and
    both accumulations are recomputed here from scratch.
    """
    ids = list(np.asarray(member_ids, dtype=np.int64))
    x = points.points
    mu = np.asarray(mu, dtype=np.float64)
    k = mu.size
    inv = np.linalg.inv(np.asarray(input_model.sigma, dtype=np.float64))

    raw = []
    for i in ids:
        d = x[i] - np.asarray(input_model.mu, dtype=np.float64)
        q = 0.0
        for m in range(k):
            for n in range(k):
                q += d[m] * inv[m, n] * d[n]
        raw.append(math.exp(-0.5 * q) if form == "standard" else math.exp(-q))
    total = sum(raw)
    if total > 0.0:
        weights = [r / total for r in raw]
    else:
        weights = [1.0 / len(ids)] * len(ids)

    cov = np.zeros((k, k))
    for w, i in zip(weights, ids):
        d = x[i] - mu
        for m in range(k):
            for n in range(k):
                cov[m, n] += w * d[m] * d[n]
    return cov


def adjusted_rand(labels_a, labels_b) -> float:
    """Adjusted Rand index over points not dropped in either labeling."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    keep = (a != DROPPED) & (b != DROPPED)
    a = a[keep]
    b = b[keep]
    n = a.size
    if n == 0:
        raise ValueError("no overlapping non-dropped points")

    table: dict = {}
    for pair in zip(a.tolist(), b.tolist()):
        table[pair] = table.get(pair, 0) + 1
    row: dict = {}
    col: dict = {}
    for (i, j), c in table.items():
        row[i] = row.get(i, 0) + c
        col[j] = col.get(j, 0) + c

    index = sum(math.comb(c, 2) for c in table.values())
    sum_row = sum(math.comb(c, 2) for c in row.values())
    sum_col = sum(math.comb(c, 2) for c in col.values())
    pairs = math.comb(n, 2)
    expected = sum_row * sum_col / pairs if pairs else 0.0
    max_index = 0.5 * (sum_row + sum_col)
    if max_index == expected:
        # both labelings are single-block or all-singletons; identical by
        # construction, score saturates
        return 1.0
    return (index - expected) / (max_index - expected)
